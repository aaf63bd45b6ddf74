#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rfsc/iq.hpp"
#include "rfsc/manifest.hpp"

namespace rfsc {

struct ToneSpec {
  double center_hz = 0.0;
  double amplitude = 0.0;
  double drift_hz = 0.0;  // per-recording constant offset drawn in [-drift, +drift]
};

/// Synthetic emission model for a 3-axis gantry robot observed at
/// complex baseband. Each motor radiates a small set of switching
/// harmonics; the controller adds an always-on broadband hump; the Y
/// motor sits next to the controller, so part of its burst power leaks
/// into that band instead of staying in clean tones.
struct EmissionModel {
  std::array<std::vector<ToneSpec>, 3> tones;  // [0]=X, [1]=Y, [2]=Z

  double mcu_low_hz = 40e3;
  double mcu_high_hz = 80e3;
  double mcu_power = 0.05;

  double y_mcu_coupling = 0.5;  // fraction of Y burst power diverted into the mcu band

  double speed_gain = 1.0;  // amplitude scale = (speed / 12.5)^speed_gain
  bool distance_maps_to_duration = true;
  double duration_scale = 0.1;  // compresses real motion time into short captures

  double gap_s = 0.02;  // idle spacing between workflow steps

  // total white-noise power in dB relative to a unit-amplitude tone;
  // -infinity disables the noise floor
  double noise_floor_db = -20.0;

  static EmissionModel defaults();
};

struct MovementSpec {
  bool x = false, y = false, z = false;
  double speed_mm_s = 12.5;
  double distance_mm = 1.0;

  std::string label() const;  // axes in canonical order, e.g. "XZ"
  static MovementSpec from_label(const std::string& label, double speed_mm_s,
                                 double distance_mm);
};

/// All seven single/combined axis labels in canonical order.
std::vector<std::string> all_movement_labels();

/// Renders one movement capture: active-axis tones over a burst whose
/// length tracks distance/speed, plus controller broadband and the
/// white-noise floor. Deterministic in all arguments.
IqRecording synth_movement(const MovementSpec& spec, const EmissionModel& model,
                           double sample_rate_hz, double duration_s, std::uint64_t seed);

/// Idle capture: controller broadband and noise floor only.
IqRecording synth_idle(const EmissionModel& model, double sample_rate_hz,
                       double duration_s, std::uint64_t seed);

enum class WorkflowKind { Push, Pull, PickAndPlace, Packing };

std::string workflow_name(WorkflowKind kind);
WorkflowKind workflow_from_name(const std::string& name);

struct WorkflowSpec {
  WorkflowKind kind = WorkflowKind::Push;
  std::vector<MovementSpec> steps;
  int set_id = 1;
};

/// Step sequence for each workflow. The four templates differ in step
/// composition (axes, speeds, distances), not just order, since the
/// downstream features average over time.
WorkflowSpec workflow_template(WorkflowKind kind, int set_id);

/// Renders gap, step, gap, ..., step, gap. Element i (gaps and steps
/// interleaved, starting at the leading gap) uses derive_seed(seed, i),
/// so any slice can be reproduced independently.
IqRecording synth_workflow(const WorkflowSpec& spec, const EmissionModel& model,
                           double sample_rate_hz, std::uint64_t seed);

/// Capture-to-capture variation: gain error, trigger offset, oscillator
/// offset. All-zero jitter reproduces the input exactly.
struct JitterSpec {
  double amplitude_pct = 0.0;   // gain drawn in [1 - p/100, 1 + p/100]
  double time_shift_s = 0.0;    // circular shift drawn in [-t, +t]
  double freq_offset_hz = 0.0;  // mixer offset drawn in [-f, +f]

  static JitterSpec defaults();
};

IqRecording perturb(const IqRecording& rec, const JitterSpec& jitter, std::uint64_t seed);

/// Full dataset description: a movement grid and/or workflow captures.
struct DatasetSpec {
  bool include_movements = true;
  std::vector<std::string> movement_labels = all_movement_labels();
  std::vector<double> distances_mm = {1.0};
  std::vector<double> speeds_mm_s = {12.5};
  std::size_t reps = 100;

  bool include_workflows = false;
  std::size_t workflow_sets = 3;
  std::size_t workflow_reps = 33;
  JitterSpec workflow_jitter = JitterSpec::defaults();  // sets 2 and up

  double sample_rate_hz = 2e6;
  double capture_s = 0.05;
  EmissionModel model = EmissionModel::defaults();
  std::uint64_t seed = 1;
};

/// Row plan (paths, labels, per-row seeds) without touching the disk.
std::vector<ManifestRow> plan_dataset(const DatasetSpec& spec);

/// Renders every planned row under out_dir and writes manifest.csv plus
/// a sim_params.txt sidecar. Returns the written manifest, digest
/// included. Byte-identical for identical spec and out-path contents.
Manifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

/// Named starting points for the CLI: "baseline", "distance-sweep",
/// "speed-sweep", "workflows", "full-scale".
DatasetSpec dataset_preset(const std::string& name, std::uint64_t seed);

std::vector<std::string> dataset_preset_names();

}  // namespace rfsc
