#include "rfsc/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include "rfsc/dsp.hpp"
#include "rfsc/errors.hpp"
#include "rfsc/rng.hpp"

namespace rfsc {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kReferenceSpeed = 12.5;  // amplitude scaling pivot, mm/s
constexpr double kRampSeconds = 0.002;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// raised-cosine on/off envelope around a burst
double envelope_at(std::size_t i, std::size_t len, std::size_t ramp) {
  if (ramp == 0) return 1.0;
  if (i < ramp) {
    const double t = static_cast<double>(i) / static_cast<double>(ramp);
    return 0.5 - 0.5 * std::cos(kPi * t);
  }
  if (i + ramp >= len) {
    const double t = static_cast<double>(len - 1 - i) / static_cast<double>(ramp);
    return 0.5 - 0.5 * std::cos(kPi * t);
  }
  return 1.0;
}

void add_tone(std::vector<std::complex<double>>& buf, double fs, double freq_hz,
              double amplitude, double phase0, std::size_t start, std::size_t len,
              std::size_t ramp) {
  const std::complex<double> step = std::polar(1.0, 2.0 * kPi * freq_hz / fs);
  std::complex<double> osc = std::polar(1.0, phase0);
  const std::size_t n = std::min(len, buf.size() - std::min(start, buf.size()));
  for (std::size_t i = 0; i < n; ++i) {
    buf[start + i] += amplitude * envelope_at(i, len, ramp) * osc;
    osc *= step;
    // the incremental rotation drifts in magnitude by O(eps) per step;
    // renormalize occasionally so long captures stay on the unit circle
    if ((i & 0xfff) == 0xfff) osc /= std::abs(osc);
  }
}

// white noise shaped to a band and scaled so its mean power over the
// span is `power`, added over [0, len) with the burst envelope
void add_band_noise(std::vector<std::complex<double>>& buf, Rng& rng, double fs,
                    double low_hz, double high_hz, double power, std::size_t start,
                    std::size_t len, std::size_t ramp) {
  if (power <= 0.0 || len == 0) return;
  const std::size_t n = std::min(len, buf.size() - std::min(start, buf.size()));
  IqRecording noise;
  noise.sample_rate_hz = fs;
  noise.samples.resize(n);
  for (auto& v : noise.samples) v = rng.normal_complex();
  BandpassSpec band;
  band.low_cut_hz = low_hz;
  band.high_cut_hz = high_hz;
  band.order = 4;
  const IqRecording shaped = apply_filter(noise, design_butterworth_bandpass(band, fs));
  double measured = 0.0;
  for (const auto& v : shaped.samples) measured += std::norm(v);
  measured /= static_cast<double>(n);
  if (measured <= 0.0) return;
  const double scale = std::sqrt(power / measured);
  for (std::size_t i = 0; i < n; ++i)
    buf[start + i] += scale * envelope_at(i, len, ramp) * shaped.samples[i];
}

std::size_t burst_samples(const MovementSpec& spec, const EmissionModel& model,
                          double fs, std::size_t capture_len) {
  if (!model.distance_maps_to_duration) return capture_len;
  const double move_s = model.duration_scale * spec.distance_mm / spec.speed_mm_s;
  const auto n = static_cast<std::size_t>(std::llround(move_s * fs));
  return std::clamp<std::size_t>(n, 1, capture_len);
}

// Shared renderer. The burst is centered in the capture. Draw order is
// fixed and versioned by the tests: per-axis tone parameters first
// (X, Y, Z), then the Y-coupling noise, then controller broadband,
// then the white floor.
IqRecording render(const MovementSpec* movement, const EmissionModel& model,
                   double fs, double duration_s, std::uint64_t seed) {
  if (!(fs > 0.0)) throw InvalidArgument("synth: sample rate must be > 0");
  if (!(duration_s > 0.0)) throw InvalidArgument("synth: duration must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  if (n == 0) throw InvalidArgument("synth: duration shorter than one sample");

  IqRecording rec;
  rec.sample_rate_hz = fs;
  rec.samples.assign(n, {0.0, 0.0});
  Rng rng(seed);

  double y_tone_power = 0.0;
  std::size_t burst = 0;
  if (movement != nullptr) {
    if (!(movement->x || movement->y || movement->z))
      throw InvalidArgument("synth: movement has no active axes");
    if (!(movement->speed_mm_s > 0.0) || !(movement->distance_mm > 0.0))
      throw InvalidArgument("synth: speed and distance must be > 0");

    burst = burst_samples(*movement, model, fs, n);
    const std::size_t burst_start = (n - burst) / 2;
    const std::size_t ramp = std::min(
        static_cast<std::size_t>(std::llround(kRampSeconds * fs)), burst / 4);
    const double amp_scale =
        std::pow(movement->speed_mm_s / kReferenceSpeed, model.speed_gain);
    const bool active[3] = {movement->x, movement->y, movement->z};
    const double keep =
        model.y_mcu_coupling > 0.0 ? std::sqrt(1.0 - model.y_mcu_coupling) : 1.0;

    for (int axis = 0; axis < 3; ++axis) {
      if (!active[axis]) continue;
      for (const ToneSpec& tone : model.tones[static_cast<std::size_t>(axis)]) {
        const double offset = rng.uniform(-tone.drift_hz, tone.drift_hz);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        double amp = tone.amplitude * amp_scale;
        if (axis == 1) {
          y_tone_power += amp * amp;
          amp *= keep;
        }
        add_tone(rec.samples, fs, tone.center_hz + offset, amp, phase, burst_start,
                 burst, ramp);
      }
    }
    if (movement->y && model.y_mcu_coupling > 0.0 && y_tone_power > 0.0) {
      add_band_noise(rec.samples, rng, fs, model.mcu_low_hz, model.mcu_high_hz,
                     model.y_mcu_coupling * y_tone_power, burst_start, burst, ramp);
    }
  }

  add_band_noise(rec.samples, rng, fs, model.mcu_low_hz, model.mcu_high_hz,
                 model.mcu_power, 0, n, 0);

  if (std::isfinite(model.noise_floor_db)) {
    const double sigma = std::sqrt(std::pow(10.0, model.noise_floor_db / 10.0));
    for (auto& v : rec.samples) v += sigma * rng.normal_complex();
  }
  return rec;
}

}  // namespace

EmissionModel EmissionModel::defaults() {
  EmissionModel m;
  m.tones[0] = {{110e3, 1.0, 300.0}, {170e3, 0.7, 300.0}, {230e3, 0.5, 300.0}};
  m.tones[1] = {{90e3, 1.0, 300.0}, {150e3, 0.7, 300.0}, {210e3, 0.5, 300.0}};
  m.tones[2] = {{130e3, 1.0, 300.0}, {190e3, 0.7, 300.0}, {250e3, 0.5, 300.0}};
  return m;
}

std::string MovementSpec::label() const {
  std::string s;
  if (x) s += 'X';
  if (y) s += 'Y';
  if (z) s += 'Z';
  return s;
}

MovementSpec MovementSpec::from_label(const std::string& label, double speed_mm_s,
                                      double distance_mm) {
  MovementSpec spec;
  spec.speed_mm_s = speed_mm_s;
  spec.distance_mm = distance_mm;
  for (const char c : label) {
    if (c == 'X' && !spec.x && !spec.y && !spec.z)
      spec.x = true;
    else if (c == 'Y' && !spec.y && !spec.z)
      spec.y = true;
    else if (c == 'Z' && !spec.z)
      spec.z = true;
    else
      throw InvalidArgument("bad movement label '" + label +
                            "' (axes X, Y, Z in order, no repeats)");
  }
  if (!spec.x && !spec.y && !spec.z)
    throw InvalidArgument("bad movement label: no axes");
  return spec;
}

std::vector<std::string> all_movement_labels() {
  return {"X", "Y", "Z", "XY", "XZ", "YZ", "XYZ"};
}

IqRecording synth_movement(const MovementSpec& spec, const EmissionModel& model,
                           double sample_rate_hz, double duration_s, std::uint64_t seed) {
  IqRecording rec = render(&spec, model, sample_rate_hz, duration_s, seed);
  rec.origin = "synth:" + spec.label();
  return rec;
}

IqRecording synth_idle(const EmissionModel& model, double sample_rate_hz,
                       double duration_s, std::uint64_t seed) {
  IqRecording rec = render(nullptr, model, sample_rate_hz, duration_s, seed);
  rec.origin = "synth:idle";
  return rec;
}

std::string workflow_name(WorkflowKind kind) {
  switch (kind) {
    case WorkflowKind::Push: return "Push";
    case WorkflowKind::Pull: return "Pull";
    case WorkflowKind::PickAndPlace: return "Pick-and-Place";
    case WorkflowKind::Packing: return "Packing";
  }
  throw InvalidArgument("unknown workflow kind");
}

WorkflowKind workflow_from_name(const std::string& name) {
  if (name == "Push") return WorkflowKind::Push;
  if (name == "Pull") return WorkflowKind::Pull;
  if (name == "Pick-and-Place") return WorkflowKind::PickAndPlace;
  if (name == "Packing") return WorkflowKind::Packing;
  throw InvalidArgument("unknown workflow '" + name +
                        "' (Push, Pull, Pick-and-Place, Packing)");
}

WorkflowSpec workflow_template(WorkflowKind kind, int set_id) {
  if (set_id < 1) throw InvalidArgument("workflow set_id must be >= 1");
  WorkflowSpec spec;
  spec.kind = kind;
  spec.set_id = set_id;
  const auto step = [](const std::string& axes, double speed, double distance) {
    return MovementSpec::from_label(axes, speed, distance);
  };
  switch (kind) {
    case WorkflowKind::Push:
      spec.steps = {step("X", 100.0, 50.0), step("Y", 50.0, 10.0)};
      break;
    case WorkflowKind::Pull:
      spec.steps = {step("Y", 50.0, 10.0), step("X", 25.0, 50.0)};
      break;
    case WorkflowKind::PickAndPlace:
      spec.steps = {step("Z", 50.0, 25.0), step("XY", 50.0, 50.0), step("Z", 50.0, 25.0),
                    step("XY", 50.0, 50.0), step("Z", 50.0, 25.0)};
      break;
    case WorkflowKind::Packing:
      // gentle press cycle: same burst lengths as pick-and-place steps
      // but at half speed, so the emitted amplitude is halved
      spec.steps = {step("Z", 25.0, 12.5), step("XY", 25.0, 25.0), step("Z", 25.0, 12.5)};
      break;
  }
  return spec;
}

IqRecording synth_workflow(const WorkflowSpec& spec, const EmissionModel& model,
                           double sample_rate_hz, std::uint64_t seed) {
  if (spec.steps.empty()) throw InvalidArgument("workflow has no steps");
  if (!(model.gap_s > 0.0)) throw InvalidArgument("workflow gap must be > 0");

  IqRecording rec;
  rec.sample_rate_hz = sample_rate_hz;
  rec.origin = "synth:workflow:" + workflow_name(spec.kind);

  std::uint64_t element = 0;
  const auto append = [&rec](const IqRecording& part) {
    rec.samples.insert(rec.samples.end(), part.samples.begin(), part.samples.end());
  };
  append(synth_idle(model, sample_rate_hz, model.gap_s, derive_seed(seed, element++)));
  for (const MovementSpec& step_spec : spec.steps) {
    // the step capture is exactly its burst, so the whole window is hot
    const double move_s = model.distance_maps_to_duration
                              ? model.duration_scale * step_spec.distance_mm /
                                    step_spec.speed_mm_s
                              : model.gap_s;
    append(synth_movement(step_spec, model, sample_rate_hz, move_s,
                          derive_seed(seed, element++)));
    append(synth_idle(model, sample_rate_hz, model.gap_s, derive_seed(seed, element++)));
  }
  return rec;
}

JitterSpec JitterSpec::defaults() {
  JitterSpec j;
  j.amplitude_pct = 5.0;
  j.time_shift_s = 0.010;
  j.freq_offset_hz = 100.0;
  return j;
}

IqRecording perturb(const IqRecording& rec, const JitterSpec& jitter, std::uint64_t seed) {
  if (rec.samples.empty()) throw EmptyInputError("perturb: empty recording");
  if (jitter.amplitude_pct < 0.0 || jitter.time_shift_s < 0.0 || jitter.freq_offset_hz < 0.0)
    throw InvalidArgument("perturb: jitter ranges must be >= 0");

  Rng rng(seed);
  const double gain = 1.0 + rng.uniform(-jitter.amplitude_pct, jitter.amplitude_pct) / 100.0;
  const double shift_s = rng.uniform(-jitter.time_shift_s, jitter.time_shift_s);
  const double offset_hz = rng.uniform(-jitter.freq_offset_hz, jitter.freq_offset_hz);

  const auto n = static_cast<std::ptrdiff_t>(rec.samples.size());
  auto shift = static_cast<std::ptrdiff_t>(std::llround(shift_s * rec.sample_rate_hz));
  shift = ((shift % n) + n) % n;

  IqRecording out;
  out.sample_rate_hz = rec.sample_rate_hz;
  out.origin = rec.origin;
  out.samples.resize(rec.samples.size());
  // circular delay, then mixer offset, then gain
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out.samples[static_cast<std::size_t>(i)] =
        rec.samples[static_cast<std::size_t>((i - shift + n) % n)];
  const std::complex<double> step =
      std::polar(1.0, 2.0 * kPi * offset_hz / rec.sample_rate_hz);
  std::complex<double> osc = {1.0, 0.0};
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] *= gain * osc;
    osc *= step;
    if ((i & 0xfff) == 0xfff) osc /= std::abs(osc);
  }
  return out;
}

namespace {

std::string sanitize_number(double v) {
  std::string s = format_double(v);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return s;
}

std::string zero_pad(std::size_t v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

std::vector<ManifestRow> plan_dataset(const DatasetSpec& spec) {
  if (!spec.include_movements && !spec.include_workflows)
    throw InvalidArgument("dataset: nothing to generate");
  if (!(spec.sample_rate_hz > 0.0) || !(spec.capture_s > 0.0))
    throw InvalidArgument("dataset: sample rate and capture length must be > 0");

  std::vector<ManifestRow> rows;
  std::uint64_t index = 0;
  if (spec.include_movements) {
    if (spec.movement_labels.empty() || spec.distances_mm.empty() ||
        spec.speeds_mm_s.empty() || spec.reps == 0)
      throw InvalidArgument("dataset: empty movement grid");
    for (const std::string& label : spec.movement_labels) {
      MovementSpec::from_label(label, 1.0, 1.0);  // validate early
      for (const double distance : spec.distances_mm) {
        for (const double speed : spec.speeds_mm_s) {
          if (!(distance > 0.0) || !(speed > 0.0))
            throw InvalidArgument("dataset: distances and speeds must be > 0");
          for (std::size_t rep = 0; rep < spec.reps; ++rep) {
            ManifestRow row;
            row.path = "iq/mv_" + label + "_d" + sanitize_number(distance) + "_s" +
                       sanitize_number(speed) + "_r" + zero_pad(rep, 4) + ".cf32";
            row.label = label;
            row.kind = "movement";
            row.speed_mm_s = speed;
            row.distance_mm = distance;
            row.set_id = 0;
            row.seed = derive_seed(spec.seed, index++);
            rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  if (spec.include_workflows) {
    if (spec.workflow_sets == 0 || spec.workflow_reps == 0)
      throw InvalidArgument("dataset: empty workflow grid");
    for (const WorkflowKind kind : {WorkflowKind::Push, WorkflowKind::Pull,
                                    WorkflowKind::PickAndPlace, WorkflowKind::Packing}) {
      const std::string name = workflow_name(kind);
      for (std::size_t set = 1; set <= spec.workflow_sets; ++set) {
        for (std::size_t rep = 0; rep < spec.workflow_reps; ++rep) {
          ManifestRow row;
          row.path = "iq/wf_" + name + "_set" + std::to_string(set) + "_r" +
                     zero_pad(rep, 4) + ".cf32";
          row.label = name;
          row.kind = "workflow";
          row.workflow = name;
          row.set_id = static_cast<int>(set);
          row.seed = derive_seed(spec.seed, index++);
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

Manifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  const auto rows = plan_dataset(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "iq", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "iq").string() + ": " + ec.message());

  for (const ManifestRow& row : rows) {
    IqRecording rec;
    if (row.kind == "movement") {
      rec = synth_movement(
          MovementSpec::from_label(row.label, row.speed_mm_s, row.distance_mm),
          spec.model, spec.sample_rate_hz, spec.capture_s, row.seed);
    } else {
      const WorkflowSpec wf = workflow_template(workflow_from_name(row.workflow), row.set_id);
      rec = synth_workflow(wf, spec.model, spec.sample_rate_hz, derive_seed(row.seed, 0));
      if (row.set_id >= 2)
        rec = perturb(rec, spec.workflow_jitter, derive_seed(row.seed, 1));
    }
    write_raw_cf32(out_dir / row.path, rec);
  }

  write_manifest(out_dir / "manifest.csv", rows);

  std::ofstream params(out_dir / "sim_params.txt", std::ios::binary | std::ios::trunc);
  if (!params) throw IoError("cannot write sim_params.txt");
  params << "generator=synthetic\n";
  params << "sample_rate_hz=" << format_double(spec.sample_rate_hz) << "\n";
  params << "capture_s=" << format_double(spec.capture_s) << "\n";
  params << "seed=" << spec.seed << "\n";
  const char* axis_names[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a)
    for (std::size_t t = 0; t < spec.model.tones[static_cast<std::size_t>(a)].size(); ++t) {
      const ToneSpec& tone = spec.model.tones[static_cast<std::size_t>(a)][t];
      params << "tone_" << axis_names[a] << t << "="
             << format_double(tone.center_hz) << "," << format_double(tone.amplitude)
             << "," << format_double(tone.drift_hz) << "\n";
    }
  params << "mcu_band_hz=" << format_double(spec.model.mcu_low_hz) << ","
         << format_double(spec.model.mcu_high_hz) << "\n";
  params << "mcu_power=" << format_double(spec.model.mcu_power) << "\n";
  params << "y_mcu_coupling=" << format_double(spec.model.y_mcu_coupling) << "\n";
  params << "speed_gain=" << format_double(spec.model.speed_gain) << "\n";
  params << "distance_maps_to_duration="
         << (spec.model.distance_maps_to_duration ? "true" : "false") << "\n";
  params << "duration_scale=" << format_double(spec.model.duration_scale) << "\n";
  params << "gap_s=" << format_double(spec.model.gap_s) << "\n";
  params << "noise_floor_db=" << format_double(spec.model.noise_floor_db) << "\n";

  return read_manifest(out_dir / "manifest.csv");
}

DatasetSpec dataset_preset(const std::string& name, std::uint64_t seed) {
  DatasetSpec spec;
  spec.seed = seed;
  if (name == "baseline") {
    return spec;
  }
  if (name == "distance-sweep") {
    spec.distances_mm = {1.0, 2.0, 5.0, 10.0, 25.0, 50.0};
    spec.reps = 30;
    // keep the longest move inside the capture so burst length, and with
    // it emitted energy, keeps growing across the whole grid
    spec.model.duration_scale = 0.01;
    return spec;
  }
  if (name == "speed-sweep") {
    spec.speeds_mm_s = {12.5, 25.0, 50.0, 75.0, 100.0};
    spec.reps = 30;
    return spec;
  }
  if (name == "workflows") {
    spec.include_movements = false;
    spec.include_workflows = true;
    return spec;
  }
  if (name == "full-scale") {
    spec.distances_mm = {1.0, 2.0, 5.0, 10.0, 25.0, 50.0};
    spec.speeds_mm_s = {12.5, 25.0, 50.0, 75.0, 100.0};
    spec.reps = 38;
    spec.include_workflows = true;
    spec.workflow_reps = 34;
    return spec;
  }
  throw InvalidArgument("unknown dataset preset '" + name + "'");
}

std::vector<std::string> dataset_preset_names() {
  return {"baseline", "distance-sweep", "speed-sweep", "workflows", "full-scale"};
}

}  // namespace rfsc
