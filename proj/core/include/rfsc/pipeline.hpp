#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rfsc/classify.hpp"
#include "rfsc/dsp.hpp"
#include "rfsc/features.hpp"
#include "rfsc/iq.hpp"
#include "rfsc/manifest.hpp"
#include "rfsc/math.hpp"

namespace rfsc {

/// Everything the end-to-end pipeline needs, with working defaults:
/// 2 MHz complex capture, 10-500 kHz band-pass of order 5, Hann STFT of
/// 16384 points at half overlap, PCA to 99.999% variance capped at 14
/// components, linear soft-margin classifier with C = 1e5.
struct PipelineConfig {
  double sample_rate_hz = 2e6;

  double band_low_hz = 10e3;
  double band_high_hz = 500e3;
  int filter_order = 5;

  std::size_t fft_len = 16384;
  WindowKind window = WindowKind::Hann;
  std::size_t hop = 0;  // 0 means fft_len / 2

  double pca_variance = 0.99999;
  std::size_t pca_cap = 14;
  std::size_t pca_fixed_k = 0;  // 0 means use the variance threshold

  SvmParams svm;
  bool grid_search = false;  // cross-validate over default_svm_grid() first

  double test_fraction = 0.2;
  std::size_t folds = 5;
  std::uint64_t seed = 42;

  std::size_t hop_or_default() const { return hop != 0 ? hop : fft_len / 2; }
  PcaTarget pca_target() const;
  void validate() const;
};

/// Applies one "key=value" setting (the config-file and --set syntax).
void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

/// Loads a key=value config file ('#' comments, blank lines ignored).
void load_config_file(const std::filesystem::path& path, PipelineConfig& cfg);

/// Loads a recording by extension: .wav as PCM I/Q, anything else as
/// raw cf32 at the configured rate.
IqRecording load_recording(const std::filesystem::path& path, const PipelineConfig& cfg);

/// Band-pass, STFT, per-bin mean magnitude: the raw spectral signature
/// of one capture (length fft_len).
std::vector<double> raw_profile(const IqRecording& rec, const PipelineConfig& cfg);

/// Trained artifact, serialized as a versioned text file.
struct ModelFile {
  int version = 1;
  PipelineConfig config;
  PcaModel pca;
  Scaler scaler;
  SvmModel svm;
  std::uint64_t manifest_digest = 0;
  double training_accuracy = 0.0;
};

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

/// Stratified train/test indices; every class contributes at least one
/// row to each side.
struct TrainTestSplit {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

TrainTestSplit stratified_split(const std::vector<std::string>& labels,
                                double test_fraction, std::uint64_t seed);

/// Tabular experiment output: metric rows by condition columns.
struct Report {
  std::string kind;
  std::vector<std::string> column_labels;
  std::vector<std::string> row_labels;
  Matrix cells;  // NaN marks undefined entries
  std::vector<std::string> notes;
  double mean_extraction_ms = 0.0;

  std::string to_text() const;
  std::string to_csv() const;
};

/// Extracts features for every manifest row, fits PCA and scaler on the
/// training split, trains the classifier (optionally grid-searched),
/// and reports training accuracy.
ModelFile train_pipeline(const Manifest& manifest, const PipelineConfig& cfg);

std::string predict_label(const ModelFile& model, const std::filesystem::path& iq_path);

/// Held-out evaluation. When the manifest digest matches the one the
/// model was trained from, the original test split is re-derived and
/// scored; otherwise every row is scored and a note says so.
Report eval_model(const Manifest& manifest, const ModelFile& model);

enum class SweepKind { Distance, Speed };

/// Per-cell experiments over the manifest's distance or speed grid:
/// each cell gets its own split, feature fit, and classifier. Also
/// reports mean recording energy per cell.
Report granularity_sweep(const Manifest& manifest, const PipelineConfig& cfg,
                         SweepKind kind);

/// Accuracy and mean single-capture extraction time for each window *
/// fft-length combination.
Report stft_sweep(const Manifest& manifest, const PipelineConfig& cfg,
                  const std::vector<WindowKind>& windows,
                  const std::vector<std::size_t>& fft_lens, std::size_t timing_runs);

/// Workflow recovery: one classifier over all capture sets, recovery
/// rate reported per set on the held-out rows.
Report workflow_eval(const Manifest& manifest, const PipelineConfig& cfg);

/// Averaged Welch spectrum over (up to max_rows) recordings with peak
/// and -20 dB extent, for choosing a processing band.
struct BandSummary {
  std::vector<double> freq_hz;  // centered: -fs/2 .. fs/2
  std::vector<double> psd_db;
  double peak_hz = 0.0;
  double low_edge_hz = 0.0;
  double high_edge_hz = 0.0;
  std::vector<std::string> notes;
};

BandSummary band_explore(const Manifest& manifest, const PipelineConfig& cfg,
                         std::size_t max_rows);

}  // namespace rfsc
