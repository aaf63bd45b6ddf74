#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "rfsc/errors.hpp"
#include "rfsc/pipeline.hpp"
#include "rfsc/simulate.hpp"

namespace {

using rfsc::PipelineConfig;

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> sets;
  bool grid_search = false;
  std::vector<std::pair<std::string, std::string>> flag_values;
  std::vector<CLI::Option*> flag_options;

  PipelineConfig build() const {
    PipelineConfig cfg;
    if (!config_path.empty()) rfsc::load_config_file(config_path, cfg);
    for (std::size_t i = 0; i < flag_values.size(); ++i)
      if (flag_options[i]->count() > 0)
        rfsc::apply_config_entry(cfg, flag_values[i].first, flag_values[i].second);
    if (grid_search) cfg.grid_search = true;
    for (const auto& entry : sets) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos)
        throw rfsc::InvalidArgument("--set expects key=value, got '" + entry + "'");
      rfsc::apply_config_entry(cfg, entry.substr(0, eq), entry.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
  }
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file")
      ->check(CLI::ExistingFile);
  static const std::pair<const char*, const char*> kFlags[] = {
      {"--sample-rate-hz", "sample_rate_hz"},
      {"--band-low-hz", "band_low_hz"},
      {"--band-high-hz", "band_high_hz"},
      {"--filter-order", "filter_order"},
      {"--fft-len", "fft_len"},
      {"--window", "window"},
      {"--hop", "hop"},
      {"--pca-variance", "pca_variance"},
      {"--pca-cap", "pca_cap"},
      {"--pca-fixed-k", "pca_fixed_k"},
      {"--svm-c", "svm_c"},
      {"--svm-kernel", "svm_kernel"},
      {"--svm-gamma", "svm_gamma"},
      {"--svm-tol", "svm_tol"},
      {"--svm-max-passes", "svm_max_passes"},
      {"--test-fraction", "test_fraction"},
      {"--folds", "folds"},
      {"--seed", "seed"},
  };
  args.flag_values.reserve(std::size(kFlags));
  for (const auto& [flag, key] : kFlags) {
    args.flag_values.emplace_back(key, std::string());
    args.flag_options.push_back(
        cmd->add_option(flag, args.flag_values.back().second, std::string("sets ") + key));
  }
  cmd->add_flag("--grid-search", args.grid_search,
                "cross-validate C/kernel/gamma over the default grid");
  cmd->add_option("--set", args.sets, "extra key=value setting (repeatable)");
}

void emit_report(const rfsc::Report& report, const std::string& csv_path) {
  std::cout << report.to_text();
  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw rfsc::IoError("cannot open " + csv_path + " for writing");
    out << report.to_csv();
    if (!out) throw rfsc::IoError("cannot write " + csv_path);
    std::cout << "csv written to " << csv_path << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robot movement fingerprinting from RF side-channel captures"};
  app.require_subcommand(1);

  std::string stage = "startup";

  // simulate
  auto* sim = app.add_subcommand("simulate", "render a synthetic capture dataset");
  std::string sim_preset = "baseline";
  std::string sim_out;
  std::uint64_t sim_seed = 1;
  sim->add_option("--preset", sim_preset, "dataset preset")
      ->check(CLI::IsMember(rfsc::dataset_preset_names()));
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_option("--seed", sim_seed, "master seed")->capture_default_str();
  sim->callback([&] {
    stage = "simulate";
    const auto spec = rfsc::dataset_preset(sim_preset, sim_seed);
    const auto manifest = rfsc::generate_dataset(spec, sim_out);
    std::cout << "wrote " << manifest.rows.size() << " captures under " << sim_out
              << "\nmanifest: " << (std::filesystem::path(sim_out) / "manifest.csv").string()
              << "\n";
  });

  // train
  auto* train = app.add_subcommand("train", "fit the feature pipeline and classifier");
  std::string train_manifest, train_model;
  ConfigArgs train_cfg;
  train->add_option("--manifest", train_manifest, "dataset manifest.csv")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--model", train_model, "output model path")->required();
  add_config_flags(train, train_cfg);
  train->callback([&] {
    stage = "train";
    const auto cfg = train_cfg.build();
    const auto manifest = rfsc::read_manifest(train_manifest);
    const auto model = rfsc::train_pipeline(manifest, cfg);
    rfsc::save_model(train_model, model);
    std::cout << "model written to " << train_model
              << "\ncomponents: " << model.pca.component_count()
              << ", classes: " << model.svm.classes.size()
              << "\ntraining accuracy: " << model.training_accuracy << "\n";
  });

  // predict
  auto* predict = app.add_subcommand("predict", "classify capture files");
  std::string predict_model;
  std::vector<std::string> predict_files;
  predict->add_option("--model", predict_model, "trained model path")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("files", predict_files, "capture files (.cf32 or .wav)")
      ->required()
      ->check(CLI::ExistingFile);
  predict->callback([&] {
    stage = "predict";
    const auto model = rfsc::load_model(predict_model);
    for (const auto& f : predict_files)
      std::cout << f << "\t" << rfsc::predict_label(model, f) << "\n";
  });

  // eval
  auto* eval = app.add_subcommand(
      "eval", "score a model on a manifest, or run a granularity sweep");
  std::string eval_manifest, eval_model, eval_sweep, eval_csv;
  ConfigArgs eval_cfg;
  eval->add_option("--manifest", eval_manifest, "dataset manifest.csv")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--model", eval_model, "trained model path")->check(CLI::ExistingFile);
  eval->add_option("--sweep", eval_sweep, "per-cell sweep instead of model scoring")
      ->check(CLI::IsMember({"distance", "speed"}));
  eval->add_option("--csv", eval_csv, "also write the report as CSV");
  add_config_flags(eval, eval_cfg);
  eval->callback([&] {
    stage = "eval";
    const auto manifest = rfsc::read_manifest(eval_manifest);
    if (!eval_sweep.empty()) {
      const auto cfg = eval_cfg.build();
      const auto kind = eval_sweep == "distance" ? rfsc::SweepKind::Distance
                                                 : rfsc::SweepKind::Speed;
      emit_report(rfsc::granularity_sweep(manifest, cfg, kind), eval_csv);
      return;
    }
    if (eval_model.empty())
      throw rfsc::InvalidArgument("eval needs --model or --sweep");
    emit_report(rfsc::eval_model(manifest, rfsc::load_model(eval_model)), eval_csv);
  });

  // stft-sweep
  auto* sweep = app.add_subcommand("stft-sweep",
                                   "accuracy and extraction time per window and FFT length");
  std::string sweep_manifest, sweep_csv;
  std::vector<std::string> sweep_windows = {"hann", "hamming", "blackman"};
  std::vector<std::size_t> sweep_ffts = {8192, 16384, 32768};
  std::size_t sweep_runs = 100;
  ConfigArgs sweep_cfg;
  sweep->add_option("--manifest", sweep_manifest, "dataset manifest.csv")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--windows", sweep_windows, "window list")->capture_default_str();
  sweep->add_option("--fft-lens", sweep_ffts, "FFT length list")->capture_default_str();
  sweep->add_option("--timing-runs", sweep_runs, "timed extractions per cell")->capture_default_str();
  sweep->add_option("--csv", sweep_csv, "also write the report as CSV");
  add_config_flags(sweep, sweep_cfg);
  sweep->callback([&] {
    stage = "stft-sweep";
    const auto cfg = sweep_cfg.build();
    const auto manifest = rfsc::read_manifest(sweep_manifest);
    std::vector<rfsc::WindowKind> windows;
    for (const auto& name : sweep_windows) windows.push_back(rfsc::window_from_name(name));
    emit_report(rfsc::stft_sweep(manifest, cfg, windows, sweep_ffts, sweep_runs),
                sweep_csv);
  });

  // workflow-eval
  auto* wf = app.add_subcommand("workflow-eval",
                                "per-set workflow recovery with one shared classifier");
  std::string wf_manifest, wf_csv;
  ConfigArgs wf_cfg;
  wf->add_option("--manifest", wf_manifest, "dataset manifest.csv")
      ->required()
      ->check(CLI::ExistingFile);
  wf->add_option("--csv", wf_csv, "also write the report as CSV");
  add_config_flags(wf, wf_cfg);
  wf->callback([&] {
    stage = "workflow-eval";
    const auto cfg = wf_cfg.build();
    const auto manifest = rfsc::read_manifest(wf_manifest);
    emit_report(rfsc::workflow_eval(manifest, cfg), wf_csv);
  });

  // band-explore
  auto* band = app.add_subcommand("band-explore",
                                  "averaged spectrum summary for band selection");
  std::string band_manifest, band_csv;
  std::size_t band_rows = 8;
  ConfigArgs band_cfg;
  band->add_option("--manifest", band_manifest, "dataset manifest.csv")
      ->required()
      ->check(CLI::ExistingFile);
  band->add_option("--max-rows", band_rows, "captures to average")->capture_default_str();
  band->add_option("--csv", band_csv, "write freq_hz,psd_db to CSV");
  add_config_flags(band, band_cfg);
  band->callback([&] {
    stage = "band-explore";
    const auto cfg = band_cfg.build();
    const auto manifest = rfsc::read_manifest(band_manifest);
    const auto summary = rfsc::band_explore(manifest, cfg, band_rows);
    std::cout << "peak: " << summary.peak_hz << " hz\n-20 dB extent: " << summary.low_edge_hz
              << " .. " << summary.high_edge_hz << " hz\n";
    for (const auto& n : summary.notes) std::cout << "# " << n << "\n";
    if (!band_csv.empty()) {
      std::ofstream out(band_csv, std::ios::binary | std::ios::trunc);
      if (!out) throw rfsc::IoError("cannot open " + band_csv + " for writing");
      out << "freq_hz,psd_db\n";
      for (std::size_t i = 0; i < summary.freq_hz.size(); ++i)
        out << summary.freq_hz[i] << ',' << summary.psd_db[i] << "\n";
      std::cout << "csv written to " << band_csv << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
