#include "rfsc/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "rfsc/errors.hpp"
#include "rfsc/rng.hpp"

namespace rfsc {
namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double_str(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("bad numeric value '" + s + "' for " + what);
  return v;
}

std::uint64_t parse_u64_str(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("bad integer value '" + s + "' for " + what);
  return v;
}

bool parse_bool_str(const std::string& s, const std::string& what) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw InvalidArgument("bad boolean value '" + s + "' for " + what);
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

PcaTarget PipelineConfig::pca_target() const {
  if (pca_fixed_k > 0) return PcaTarget::fixed(pca_fixed_k);
  return PcaTarget::variance(pca_variance, pca_cap);
}

void PipelineConfig::validate() const {
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("config: sample_rate_hz must be > 0");
  if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz &&
        band_high_hz < sample_rate_hz / 2.0))
    throw InvalidArgument("config: need 0 < band_low_hz < band_high_hz < Nyquist");
  if (filter_order < 1 || filter_order > 16)
    throw InvalidArgument("config: filter_order out of range [1, 16]");
  if (fft_len < 2) throw InvalidArgument("config: fft_len must be at least 2");
  if (hop > fft_len) throw InvalidArgument("config: hop must be in [0, fft_len]");
  if (pca_fixed_k == 0 && !(pca_variance > 0.0 && pca_variance <= 1.0))
    throw InvalidArgument("config: pca_variance must be in (0, 1]");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidArgument("config: test_fraction must be in (0, 1)");
  if (folds < 2) throw InvalidArgument("config: folds must be at least 2");
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "sample_rate_hz") cfg.sample_rate_hz = parse_double_str(value, key);
  else if (key == "band_low_hz") cfg.band_low_hz = parse_double_str(value, key);
  else if (key == "band_high_hz") cfg.band_high_hz = parse_double_str(value, key);
  else if (key == "filter_order") cfg.filter_order = static_cast<int>(parse_u64_str(value, key));
  else if (key == "fft_len") cfg.fft_len = parse_u64_str(value, key);
  else if (key == "window") cfg.window = window_from_name(value);
  else if (key == "hop") cfg.hop = parse_u64_str(value, key);
  else if (key == "pca_variance") cfg.pca_variance = parse_double_str(value, key);
  else if (key == "pca_cap") cfg.pca_cap = parse_u64_str(value, key);
  else if (key == "pca_fixed_k") cfg.pca_fixed_k = parse_u64_str(value, key);
  else if (key == "svm_c") cfg.svm.c = parse_double_str(value, key);
  else if (key == "svm_kernel") cfg.svm.kernel = kernel_from_name(value);
  else if (key == "svm_gamma") cfg.svm.gamma = parse_double_str(value, key);
  else if (key == "svm_tol") cfg.svm.tol = parse_double_str(value, key);
  else if (key == "svm_max_passes") cfg.svm.max_passes = static_cast<int>(parse_u64_str(value, key));
  else if (key == "grid_search") cfg.grid_search = parse_bool_str(value, key);
  else if (key == "test_fraction") cfg.test_fraction = parse_double_str(value, key);
  else if (key == "folds") cfg.folds = parse_u64_str(value, key);
  else if (key == "seed") cfg.seed = parse_u64_str(value, key);
  else throw InvalidArgument("unknown config key '" + key + "'");
}

void load_config_file(const std::filesystem::path& path, PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw FormatError("config " + path.string() + " line " + std::to_string(line_no) +
                        ": expected key=value");
    apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

IqRecording load_recording(const std::filesystem::path& path, const PipelineConfig& cfg) {
  if (path.extension() == ".wav") return load_wav_iq(path);
  return load_raw_cf32(path, cfg.sample_rate_hz);
}

std::vector<double> raw_profile(const IqRecording& rec, const PipelineConfig& cfg) {
  if (rec.sample_rate_hz != cfg.sample_rate_hz)
    throw DataError("recording rate " + format_double(rec.sample_rate_hz) +
                    " does not match configured rate " +
                    format_double(cfg.sample_rate_hz));
  const SosFilter filter = design_butterworth_bandpass(
      {cfg.band_low_hz, cfg.band_high_hz, cfg.filter_order}, cfg.sample_rate_hz);
  const IqRecording filtered = apply_filter(rec, filter);
  const Stft grid = stft(filtered.samples, filtered.sample_rate_hz, cfg.fft_len,
                         cfg.hop_or_default(), cfg.window);
  return mean_frequency_profile(grid).values;
}

TrainTestSplit stratified_split(const std::vector<std::string>& labels,
                                double test_fraction, std::uint64_t seed) {
  if (labels.empty()) throw EmptyInputError("split: no samples");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidArgument("split: test fraction must be in (0, 1)");

  std::vector<std::string> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  TrainTestSplit split;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == classes[c]) members.push_back(i);
    if (members.size() < 2)
      throw StratificationError("split: class '" + classes[c] +
                                "' needs at least 2 samples");
    Rng rng(derive_seed(seed, c));
    rng.shuffle(members);
    const auto want = std::llround(test_fraction * static_cast<double>(members.size()));
    const std::size_t n_test = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::max<long long>(want, 0)), 1, members.size() - 1);
    for (std::size_t t = 0; t < members.size(); ++t)
      (t < n_test ? split.test_rows : split.train_rows).push_back(members[t]);
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  return split;
}

std::string Report::to_text() const {
  std::ostringstream out;
  out << kind << " report\n";
  std::size_t name_w = 6;
  for (const auto& r : row_labels) name_w = std::max(name_w, r.size());
  const auto cell_str = [](double v) -> std::string {
    if (std::isnan(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
  };
  std::vector<std::size_t> col_w(column_labels.size());
  for (std::size_t c = 0; c < column_labels.size(); ++c) {
    col_w[c] = std::max<std::size_t>(column_labels[c].size(), 8);
    for (std::size_t r = 0; r < row_labels.size(); ++r)
      col_w[c] = std::max(col_w[c], cell_str(cells(r, c)).size());
  }
  out << std::string(name_w, ' ');
  for (std::size_t c = 0; c < column_labels.size(); ++c) {
    out << "  ";
    out << std::string(col_w[c] - column_labels[c].size(), ' ') << column_labels[c];
  }
  out << "\n";
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    out << row_labels[r] << std::string(name_w - row_labels[r].size(), ' ');
    for (std::size_t c = 0; c < column_labels.size(); ++c) {
      const std::string s = cell_str(cells(r, c));
      out << "  " << std::string(col_w[c] - s.size(), ' ') << s;
    }
    out << "\n";
  }
  if (mean_extraction_ms > 0.0)
    out << "mean feature extraction: " << cell_str(mean_extraction_ms) << " ms\n";
  for (const auto& n : notes) out << "# " << n << "\n";
  return out.str();
}

std::string Report::to_csv() const {
  std::ostringstream out;
  out << "metric";
  for (const auto& c : column_labels) out << ',' << c;
  out << "\n";
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    out << row_labels[r];
    for (std::size_t c = 0; c < column_labels.size(); ++c) {
      out << ',';
      if (!std::isnan(cells(r, c))) out << format_double(cells(r, c));
    }
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------- model file

namespace {

std::string encode_doubles(std::span<const double> values) {
  std::vector<std::uint8_t> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto word = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b)
      bytes[i * 8 + static_cast<std::size_t>(b)] =
          static_cast<std::uint8_t>((word >> (8 * b)) & 0xff);
  }
  return base64_encode(bytes);
}

std::vector<double> decode_doubles(const std::string& text, std::size_t expected,
                                   const std::string& what) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != expected * 8)
    throw FormatError("model file: " + what + " has " + std::to_string(bytes.size() / 8) +
                      " values, expected " + std::to_string(expected));
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint64_t word = 0;
    for (int b = 7; b >= 0; --b)
      word = (word << 8) | bytes[i * 8 + static_cast<std::size_t>(b)];
    out[i] = std::bit_cast<double>(word);
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

constexpr const char* kModelMagic = "rfsc-model 1";

}  // namespace

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  for (const auto& c : model.svm.classes)
    if (c.find(',') != std::string::npos)
      throw InvalidArgument("model save: class name contains a comma");

  std::ostringstream out;
  out << kModelMagic << "\n";
  const PipelineConfig& c = model.config;
  out << "config.sample_rate_hz=" << format_double(c.sample_rate_hz) << "\n";
  out << "config.band_low_hz=" << format_double(c.band_low_hz) << "\n";
  out << "config.band_high_hz=" << format_double(c.band_high_hz) << "\n";
  out << "config.filter_order=" << c.filter_order << "\n";
  out << "config.fft_len=" << c.fft_len << "\n";
  out << "config.window=" << window_name(c.window) << "\n";
  out << "config.hop=" << c.hop << "\n";
  out << "config.pca_variance=" << format_double(c.pca_variance) << "\n";
  out << "config.pca_cap=" << c.pca_cap << "\n";
  out << "config.pca_fixed_k=" << c.pca_fixed_k << "\n";
  out << "config.svm_c=" << format_double(c.svm.c) << "\n";
  out << "config.svm_kernel=" << kernel_name(c.svm.kernel) << "\n";
  out << "config.svm_gamma=" << format_double(c.svm.gamma) << "\n";
  out << "config.svm_tol=" << format_double(c.svm.tol) << "\n";
  out << "config.svm_max_passes=" << c.svm.max_passes << "\n";
  out << "config.grid_search=" << (c.grid_search ? 1 : 0) << "\n";
  out << "config.test_fraction=" << format_double(c.test_fraction) << "\n";
  out << "config.folds=" << c.folds << "\n";
  out << "config.seed=" << c.seed << "\n";

  out << "pca.input_dim=" << model.pca.input_dim() << "\n";
  out << "pca.component_count=" << model.pca.component_count() << "\n";
  out << "pca.mean=" << encode_doubles(model.pca.mean) << "\n";
  out << "pca.components="
      << encode_doubles({model.pca.components.data(),
                         model.pca.components.rows() * model.pca.components.cols()})
      << "\n";
  out << "pca.explained_variance=" << encode_doubles(model.pca.explained_variance) << "\n";
  out << "pca.explained_variance_ratio="
      << encode_doubles(model.pca.explained_variance_ratio) << "\n";

  out << "scaler.dim=" << model.scaler.means.size() << "\n";
  out << "scaler.means=" << encode_doubles(model.scaler.means) << "\n";
  out << "scaler.stds=" << encode_doubles(model.scaler.stds) << "\n";

  out << "svm.feature_count=" << model.svm.feature_count << "\n";
  out << "svm.class_count=" << model.svm.classes.size() << "\n";
  out << "svm.classes=";
  for (std::size_t i = 0; i < model.svm.classes.size(); ++i)
    out << (i ? "," : "") << model.svm.classes[i];
  out << "\n";
  out << "svm.machine_count=" << model.svm.machines.size() << "\n";
  for (std::size_t i = 0; i < model.svm.machines.size(); ++i) {
    const PairwiseMachine& m = model.svm.machines[i];
    const std::string p = "svm.machine." + std::to_string(i) + ".";
    out << p << "pair=" << m.class_a << ":" << m.class_b << "\n";
    out << p << "bias=" << format_double(m.bias) << "\n";
    if (model.svm.params.kernel == SvmKernel::Linear) {
      out << p << "weights=" << encode_doubles(m.weights) << "\n";
    } else {
      out << p << "sv_count=" << m.support_vectors.rows() << "\n";
      out << p << "dual_coef=" << encode_doubles(m.dual_coef) << "\n";
      out << p << "support_vectors="
          << encode_doubles({m.support_vectors.data(),
                             m.support_vectors.rows() * m.support_vectors.cols()})
          << "\n";
    }
  }
  out << "meta.manifest_digest=" << hex64(model.manifest_digest) << "\n";
  out << "meta.training_accuracy=" << format_double(model.training_accuracy) << "\n";

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  const std::string text = out.str();
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw IoError("cannot write " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("model file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kModelMagic)
    throw FormatError("model file: bad magic or unsupported version ('" + line + "')");

  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("model file: expected key=value lines");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("model file: missing key '" + key + "'");
    return it->second;
  };

  ModelFile model;
  PipelineConfig& c = model.config;
  c.sample_rate_hz = parse_double_str(get("config.sample_rate_hz"), "sample_rate_hz");
  c.band_low_hz = parse_double_str(get("config.band_low_hz"), "band_low_hz");
  c.band_high_hz = parse_double_str(get("config.band_high_hz"), "band_high_hz");
  c.filter_order = static_cast<int>(parse_u64_str(get("config.filter_order"), "filter_order"));
  c.fft_len = parse_u64_str(get("config.fft_len"), "fft_len");
  c.window = window_from_name(get("config.window"));
  c.hop = parse_u64_str(get("config.hop"), "hop");
  c.pca_variance = parse_double_str(get("config.pca_variance"), "pca_variance");
  c.pca_cap = parse_u64_str(get("config.pca_cap"), "pca_cap");
  c.pca_fixed_k = parse_u64_str(get("config.pca_fixed_k"), "pca_fixed_k");
  c.svm.c = parse_double_str(get("config.svm_c"), "svm_c");
  c.svm.kernel = kernel_from_name(get("config.svm_kernel"));
  c.svm.gamma = parse_double_str(get("config.svm_gamma"), "svm_gamma");
  c.svm.tol = parse_double_str(get("config.svm_tol"), "svm_tol");
  c.svm.max_passes = static_cast<int>(parse_u64_str(get("config.svm_max_passes"), "svm_max_passes"));
  c.grid_search = parse_bool_str(get("config.grid_search"), "grid_search");
  c.test_fraction = parse_double_str(get("config.test_fraction"), "test_fraction");
  c.folds = parse_u64_str(get("config.folds"), "folds");
  c.seed = parse_u64_str(get("config.seed"), "seed");

  const std::size_t d = parse_u64_str(get("pca.input_dim"), "pca.input_dim");
  const std::size_t k = parse_u64_str(get("pca.component_count"), "pca.component_count");
  model.pca.mean = decode_doubles(get("pca.mean"), d, "pca.mean");
  const auto comp = decode_doubles(get("pca.components"), k * d, "pca.components");
  model.pca.components = Matrix(k, d);
  std::copy(comp.begin(), comp.end(), model.pca.components.data());
  model.pca.explained_variance =
      decode_doubles(get("pca.explained_variance"), k, "pca.explained_variance");
  model.pca.explained_variance_ratio = decode_doubles(
      get("pca.explained_variance_ratio"), k, "pca.explained_variance_ratio");

  const std::size_t sdim = parse_u64_str(get("scaler.dim"), "scaler.dim");
  model.scaler.means = decode_doubles(get("scaler.means"), sdim, "scaler.means");
  model.scaler.stds = decode_doubles(get("scaler.stds"), sdim, "scaler.stds");

  model.svm.params = c.svm;
  model.svm.feature_count = parse_u64_str(get("svm.feature_count"), "svm.feature_count");
  const std::size_t class_count = parse_u64_str(get("svm.class_count"), "svm.class_count");
  {
    const std::string& names = get("svm.classes");
    std::string cur;
    for (const char ch : names) {
      if (ch == ',') {
        model.svm.classes.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    model.svm.classes.push_back(cur);
    if (model.svm.classes.size() != class_count)
      throw FormatError("model file: class list does not match class_count");
  }
  const std::size_t machine_count = parse_u64_str(get("svm.machine_count"), "svm.machine_count");
  for (std::size_t i = 0; i < machine_count; ++i) {
    const std::string p = "svm.machine." + std::to_string(i) + ".";
    PairwiseMachine m;
    const std::string& pair = get(p + "pair");
    const auto colon = pair.find(':');
    if (colon == std::string::npos)
      throw FormatError("model file: bad machine pair '" + pair + "'");
    m.class_a = parse_u64_str(pair.substr(0, colon), "machine pair");
    m.class_b = parse_u64_str(pair.substr(colon + 1), "machine pair");
    if (m.class_a >= class_count || m.class_b >= class_count || m.class_a >= m.class_b)
      throw FormatError("model file: machine pair out of range");
    m.bias = parse_double_str(get(p + "bias"), "machine bias");
    if (c.svm.kernel == SvmKernel::Linear) {
      m.weights = decode_doubles(get(p + "weights"), model.svm.feature_count, "weights");
    } else {
      const std::size_t sv = parse_u64_str(get(p + "sv_count"), "sv_count");
      m.dual_coef = decode_doubles(get(p + "dual_coef"), sv, "dual_coef");
      const auto flat = decode_doubles(get(p + "support_vectors"),
                                       sv * model.svm.feature_count, "support_vectors");
      m.support_vectors = Matrix(sv, model.svm.feature_count);
      std::copy(flat.begin(), flat.end(), m.support_vectors.data());
    }
    model.svm.machines.push_back(std::move(m));
  }

  const std::string& digest = get("meta.manifest_digest");
  if (digest.size() != 16) throw FormatError("model file: bad manifest digest");
  std::uint64_t dg = 0;
  for (const char ch : digest) {
    dg <<= 4;
    if (ch >= '0' && ch <= '9') dg |= static_cast<std::uint64_t>(ch - '0');
    else if (ch >= 'a' && ch <= 'f') dg |= static_cast<std::uint64_t>(ch - 'a' + 10);
    else throw FormatError("model file: bad manifest digest");
  }
  model.manifest_digest = dg;
  model.training_accuracy =
      parse_double_str(get("meta.training_accuracy"), "training_accuracy");
  return model;
}

// ------------------------------------------------------------- experiments

namespace {

struct ExtractedRows {
  Matrix profiles;               // n x fft_len
  std::vector<std::string> labels;
  std::vector<double> energy;    // sum |x|^2 per recording
  double mean_ms = 0.0;
};

ExtractedRows extract_rows(const Manifest& manifest, const PipelineConfig& cfg,
                           const std::vector<std::size_t>& rows) {
  ExtractedRows out;
  out.profiles = Matrix(rows.size(), cfg.fft_len);
  out.labels.resize(rows.size());
  out.energy.resize(rows.size());
  double total_ms = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const ManifestRow& row = manifest.rows[rows[r]];
    const IqRecording rec = load_recording(manifest.resolve(row), cfg);
    double e = 0.0;
    for (const auto& v : rec.samples) e += std::norm(v);
    out.energy[r] = e;
    const auto t0 = std::chrono::steady_clock::now();
    const auto profile = raw_profile(rec, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
    std::copy(profile.begin(), profile.end(), out.profiles.row(r).begin());
    out.labels[r] = row.label;
  }
  out.mean_ms = rows.empty() ? 0.0 : total_ms / static_cast<double>(rows.size());
  return out;
}

std::vector<std::size_t> all_row_indices(const Manifest& manifest) {
  std::vector<std::size_t> rows(manifest.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = x.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

std::vector<std::string> take_labels(const std::vector<std::string>& labels,
                                     const std::vector<std::size_t>& rows) {
  std::vector<std::string> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = labels[rows[r]];
  return out;
}

struct FittedExperiment {
  PcaModel pca;
  Scaler scaler;
  SvmModel svm;
  double train_accuracy = 0.0;
  SvmParams params;
};

Matrix model_features(const PcaModel& pca, const Scaler& scaler, const Matrix& raw) {
  return scaler_transform(scaler, pca_transform(pca, raw));
}

// shared fit path: feature fit on the training rows, optional grid
// search, classifier training
FittedExperiment fit_experiment(const Matrix& train_raw,
                                const std::vector<std::string>& train_labels,
                                const PipelineConfig& cfg) {
  FittedExperiment fit;
  fit.pca = pca_fit(train_raw, cfg.pca_target());
  const Matrix train_p = pca_transform(fit.pca, train_raw);
  fit.scaler = scaler_fit(train_p);
  const Matrix train_f = scaler_transform(fit.scaler, train_p);

  fit.params = cfg.svm;
  if (cfg.grid_search) {
    const auto grid = default_svm_grid(cfg.svm.tol, cfg.svm.max_passes);
    const auto result =
        grid_search_cv(train_f, train_labels, grid, cfg.folds, derive_seed(cfg.seed, 0xc5));
    fit.params = result.best;
  }
  fit.svm = svm_train(train_f, train_labels, fit.params);

  const auto pred = svm_predict(fit.svm, train_f);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == train_labels[i]) ++correct;
  fit.train_accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
  return fit;
}

std::vector<std::string> sorted_classes(const std::vector<std::string>& labels) {
  std::vector<std::string> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

// standard metric row block: accuracy, then precision/recall per class
void fill_metric_rows(Report& report, std::size_t col, const EvalMetrics& metrics,
                      const std::vector<std::string>& classes) {
  report.cells(0, col) = metrics.accuracy;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto it = std::lower_bound(metrics.classes.begin(), metrics.classes.end(),
                                     classes[c]);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (it == metrics.classes.end() || *it != classes[c]) {
      report.cells(1 + c, col) = nan;
      report.cells(1 + classes.size() + c, col) = nan;
      continue;
    }
    const auto idx = static_cast<std::size_t>(it - metrics.classes.begin());
    const ClassMetrics& cm = metrics.per_class[idx];
    report.cells(1 + c, col) = cm.precision_defined ? cm.precision : nan;
    report.cells(1 + classes.size() + c, col) = cm.recall_defined ? cm.recall : nan;
  }
}

std::vector<std::string> metric_row_labels(const std::vector<std::string>& classes) {
  std::vector<std::string> rows;
  rows.push_back("accuracy");
  for (const auto& c : classes) rows.push_back("precision_" + c);
  for (const auto& c : classes) rows.push_back("recall_" + c);
  return rows;
}

void append_confusion_notes(Report& report, const EvalMetrics& metrics) {
  std::ostringstream line;
  line << "confusion rows=true cols=predicted, classes:";
  for (const auto& c : metrics.classes) line << ' ' << c;
  report.notes.push_back(line.str());
  for (std::size_t t = 0; t < metrics.classes.size(); ++t) {
    std::ostringstream row;
    row << metrics.classes[t] << ':';
    for (std::size_t p = 0; p < metrics.classes.size(); ++p)
      row << ' ' << metrics.confusion[t][p];
    report.notes.push_back(row.str());
  }
  for (std::size_t c = 0; c < metrics.classes.size(); ++c)
    if (!metrics.per_class[c].precision_defined)
      report.notes.push_back("precision undefined for '" + metrics.classes[c] +
                             "' (never predicted)");
}

}  // namespace

ModelFile train_pipeline(const Manifest& manifest, const PipelineConfig& cfg) {
  cfg.validate();
  const auto extracted = extract_rows(manifest, cfg, all_row_indices(manifest));
  const auto split = stratified_split(extracted.labels, cfg.test_fraction, cfg.seed);

  const Matrix train_raw = take_rows(extracted.profiles, split.train_rows);
  const auto train_labels = take_labels(extracted.labels, split.train_rows);
  const FittedExperiment fit = fit_experiment(train_raw, train_labels, cfg);

  ModelFile model;
  model.config = cfg;
  model.config.svm = fit.params;
  model.pca = fit.pca;
  model.scaler = fit.scaler;
  model.svm = fit.svm;
  model.manifest_digest = manifest.digest;
  model.training_accuracy = fit.train_accuracy;
  return model;
}

std::string predict_label(const ModelFile& model, const std::filesystem::path& iq_path) {
  const IqRecording rec = load_recording(iq_path, model.config);
  const auto profile = raw_profile(rec, model.config);
  Matrix raw(1, profile.size());
  std::copy(profile.begin(), profile.end(), raw.row(0).begin());
  const Matrix features = model_features(model.pca, model.scaler, raw);
  return svm_predict(model.svm, features).front();
}

Report eval_model(const Manifest& manifest, const ModelFile& model) {
  model.config.validate();
  std::vector<std::size_t> rows;
  const bool same_manifest = manifest.digest == model.manifest_digest;
  std::vector<std::string> all_labels(manifest.rows.size());
  for (std::size_t i = 0; i < manifest.rows.size(); ++i)
    all_labels[i] = manifest.rows[i].label;
  if (same_manifest) {
    rows = stratified_split(all_labels, model.config.test_fraction, model.config.seed)
               .test_rows;
  } else {
    rows = all_row_indices(manifest);
  }

  const auto extracted = extract_rows(manifest, model.config, rows);
  const Matrix features = model_features(model.pca, model.scaler, extracted.profiles);
  const EvalMetrics metrics = svm_evaluate(model.svm, features, extracted.labels);

  const auto classes = model.svm.classes;
  Report report;
  report.kind = "baseline";
  report.column_labels = {"all"};
  report.row_labels = metric_row_labels(classes);
  report.cells = Matrix(report.row_labels.size(), 1);
  fill_metric_rows(report, 0, metrics, classes);
  report.mean_extraction_ms = extracted.mean_ms;
  report.notes.push_back(same_manifest
                             ? "scored the held-out test split (manifest digest matches)"
                             : "manifest differs from the training manifest; scored all rows");
  report.notes.push_back("evaluated rows: " + std::to_string(rows.size()));
  report.notes.push_back("training accuracy: " + format_double(model.training_accuracy));
  append_confusion_notes(report, metrics);
  return report;
}

Report granularity_sweep(const Manifest& manifest, const PipelineConfig& cfg,
                         SweepKind kind) {
  cfg.validate();
  const bool by_distance = kind == SweepKind::Distance;
  const auto extracted = extract_rows(manifest, cfg, all_row_indices(manifest));

  std::vector<double> values;
  for (const auto& row : manifest.rows)
    values.push_back(by_distance ? row.distance_mm : row.speed_mm_s);
  std::vector<double> grid = values;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const auto classes = sorted_classes(extracted.labels);
  Report report;
  report.kind = by_distance ? "distance-sweep" : "speed-sweep";
  report.row_labels = metric_row_labels(classes);
  report.row_labels.push_back("mean_energy");
  report.cells = Matrix(report.row_labels.size(), grid.size());
  report.mean_extraction_ms = extracted.mean_ms;

  for (std::size_t g = 0; g < grid.size(); ++g) {
    report.column_labels.push_back(format_double(grid[g]));
    std::vector<std::size_t> cell_rows;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] == grid[g]) cell_rows.push_back(i);

    const auto cell_labels = take_labels(extracted.labels, cell_rows);
    const auto split = stratified_split(cell_labels, cfg.test_fraction,
                                        derive_seed(cfg.seed, g));
    const Matrix cell_raw = take_rows(extracted.profiles, cell_rows);
    const Matrix train_raw = take_rows(cell_raw, split.train_rows);
    const auto train_labels = take_labels(cell_labels, split.train_rows);
    const FittedExperiment fit = fit_experiment(train_raw, train_labels, cfg);

    const Matrix test_features = model_features(
        fit.pca, fit.scaler, take_rows(cell_raw, split.test_rows));
    const auto test_labels = take_labels(cell_labels, split.test_rows);
    const EvalMetrics metrics = svm_evaluate(fit.svm, test_features, test_labels);
    fill_metric_rows(report, g, metrics, classes);

    double energy = 0.0;
    for (const std::size_t r : cell_rows) energy += extracted.energy[r];
    report.cells(report.row_labels.size() - 1, g) =
        energy / static_cast<double>(cell_rows.size());
  }
  report.notes.push_back(std::string("per-cell experiments over ") +
                         (by_distance ? "distance_mm" : "speed_mm_s") +
                         "; feature fit per cell");
  return report;
}

Report stft_sweep(const Manifest& manifest, const PipelineConfig& cfg,
                  const std::vector<WindowKind>& windows,
                  const std::vector<std::size_t>& fft_lens, std::size_t timing_runs) {
  cfg.validate();
  if (windows.empty() || fft_lens.empty())
    throw InvalidArgument("stft sweep: empty window or fft grid");
  if (timing_runs == 0) throw InvalidArgument("stft sweep: timing_runs must be >= 1");

  // one fixed capture for the timing loops, so cells are comparable
  const IqRecording timing_rec =
      load_recording(manifest.resolve(manifest.rows.front()), cfg);

  Report report;
  report.kind = "stft-sweep";
  for (const std::size_t f : fft_lens) report.column_labels.push_back(std::to_string(f));
  for (const WindowKind w : windows) {
    report.row_labels.push_back(window_name(w) + " accuracy");
    report.row_labels.push_back(window_name(w) + " time_ms");
  }
  report.cells = Matrix(report.row_labels.size(), fft_lens.size());

  double best_acc = -1.0;
  std::string best_cell;
  std::vector<PipelineConfig> cell_cfgs;
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    for (std::size_t fi = 0; fi < fft_lens.size(); ++fi) {
      PipelineConfig cell = cfg;
      cell.window = windows[wi];
      cell.fft_len = fft_lens[fi];
      // fixed frame cadence across cells, so cells differ only in the
      // per-frame transform cost
      cell.hop = std::min(cfg.hop_or_default(), cell.fft_len);
      cell_cfgs.push_back(cell);

      const auto extracted = extract_rows(manifest, cell, all_row_indices(manifest));
      const auto split = stratified_split(extracted.labels, cell.test_fraction, cell.seed);
      const Matrix train_raw = take_rows(extracted.profiles, split.train_rows);
      const auto train_labels = take_labels(extracted.labels, split.train_rows);
      const FittedExperiment fit = fit_experiment(train_raw, train_labels, cell);
      const Matrix test_features = model_features(
          fit.pca, fit.scaler, take_rows(extracted.profiles, split.test_rows));
      const auto test_labels = take_labels(extracted.labels, split.test_rows);
      const EvalMetrics metrics = svm_evaluate(fit.svm, test_features, test_labels);

      report.cells(2 * wi, fi) = metrics.accuracy;
      if (metrics.accuracy > best_acc) {
        best_acc = metrics.accuracy;
        best_cell = window_name(windows[wi]) + "/" + std::to_string(fft_lens[fi]);
      }
    }
  }

  // time the cells round-robin so clock drift and host noise spread
  // across the grid instead of biasing whichever cell ran during a
  // slow phase
  std::vector<double> total_ms(cell_cfgs.size(), 0.0);
  for (const PipelineConfig& cell : cell_cfgs) (void)raw_profile(timing_rec, cell);
  for (std::size_t run = 0; run < timing_runs; ++run) {
    for (std::size_t ci = 0; ci < cell_cfgs.size(); ++ci) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)raw_profile(timing_rec, cell_cfgs[ci]);
      const auto t1 = std::chrono::steady_clock::now();
      total_ms[ci] += std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
  }
  for (std::size_t ci = 0; ci < cell_cfgs.size(); ++ci) {
    const std::size_t wi = ci / fft_lens.size();
    const std::size_t fi = ci % fft_lens.size();
    report.cells(2 * wi + 1, fi) = total_ms[ci] / static_cast<double>(timing_runs);
  }
  report.notes.push_back("best accuracy " + format_double(best_acc) + " at " + best_cell);
  report.notes.push_back("time_ms: mean single-capture extraction over " +
                         std::to_string(timing_runs) + " runs, hop fixed at " +
                         std::to_string(cfg.hop_or_default()));
  return report;
}

Report workflow_eval(const Manifest& manifest, const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> wf_rows;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i)
    if (manifest.rows[i].kind == "workflow") wf_rows.push_back(i);
  if (wf_rows.empty()) throw EmptyInputError("workflow eval: manifest has no workflow rows");

  const auto extracted = extract_rows(manifest, cfg, wf_rows);
  std::vector<int> set_ids(wf_rows.size());
  std::vector<std::string> split_keys(wf_rows.size());
  for (std::size_t r = 0; r < wf_rows.size(); ++r) {
    set_ids[r] = manifest.rows[wf_rows[r]].set_id;
    // stratify jointly on class and capture set so each set keeps
    // held-out rows of every class
    split_keys[r] = extracted.labels[r] + "|" + std::to_string(set_ids[r]);
  }
  const auto split = stratified_split(split_keys, cfg.test_fraction, cfg.seed);

  const Matrix train_raw = take_rows(extracted.profiles, split.train_rows);
  const auto train_labels = take_labels(extracted.labels, split.train_rows);
  const FittedExperiment fit = fit_experiment(train_raw, train_labels, cfg);

  const Matrix test_features = model_features(
      fit.pca, fit.scaler, take_rows(extracted.profiles, split.test_rows));
  const auto test_labels = take_labels(extracted.labels, split.test_rows);
  const auto predictions = svm_predict(fit.svm, test_features);

  std::vector<int> sets;
  for (const std::size_t r : split.test_rows) sets.push_back(set_ids[r]);
  std::vector<int> set_grid(sets.begin(), sets.end());
  std::sort(set_grid.begin(), set_grid.end());
  set_grid.erase(std::unique(set_grid.begin(), set_grid.end()), set_grid.end());

  // one row per workflow (its recovery rate, the class recall) plus a
  // per-set accuracy row
  const auto classes = sorted_classes(extracted.labels);
  Report report;
  report.kind = "workflow";
  for (const auto& c : classes) report.row_labels.push_back(c);
  report.row_labels.push_back("accuracy");
  report.cells = Matrix(report.row_labels.size(), set_grid.size() + 1);
  report.mean_extraction_ms = extracted.mean_ms;

  const auto score = [&](const std::vector<std::size_t>& idx, std::size_t col) {
    std::vector<std::string> yt, yp;
    for (const std::size_t i : idx) {
      yt.push_back(test_labels[i]);
      yp.push_back(predictions[i]);
    }
    const EvalMetrics metrics = evaluate_predictions(classes, yt, yp);
    for (std::size_t c = 0; c < classes.size(); ++c)
      report.cells(c, col) = metrics.per_class[c].recall_defined
                                 ? metrics.per_class[c].recall
                                 : std::numeric_limits<double>::quiet_NaN();
    report.cells(classes.size(), col) = metrics.accuracy;
  };

  for (std::size_t g = 0; g < set_grid.size(); ++g) {
    report.column_labels.push_back("set" + std::to_string(set_grid[g]));
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < sets.size(); ++i)
      if (sets[i] == set_grid[g]) idx.push_back(i);
    score(idx, g);
  }
  report.column_labels.push_back("overall");
  std::vector<std::size_t> everything(sets.size());
  for (std::size_t i = 0; i < everything.size(); ++i) everything[i] = i;
  score(everything, set_grid.size());

  report.notes.push_back("training rows: " + std::to_string(split.train_rows.size()) +
                         ", held-out rows: " + std::to_string(split.test_rows.size()));
  report.notes.push_back("training accuracy: " + format_double(fit.train_accuracy));
  for (int expected = 1; expected <= set_grid.back(); ++expected)
    if (!std::binary_search(set_grid.begin(), set_grid.end(), expected))
      report.notes.push_back("warning: capture set " + std::to_string(expected) +
                             " is missing; report covers the sets present");
  return report;
}

BandSummary band_explore(const Manifest& manifest, const PipelineConfig& cfg,
                         std::size_t max_rows) {
  cfg.validate();
  if (max_rows == 0) throw InvalidArgument("band explore: max_rows must be >= 1");
  const std::size_t count = std::min(max_rows, manifest.rows.size());

  std::vector<double> mean_psd;
  for (std::size_t i = 0; i < count; ++i) {
    const IqRecording rec = load_recording(manifest.resolve(manifest.rows[i]), cfg);
    const auto psd = welch_psd(rec, cfg.fft_len, cfg.window);
    if (mean_psd.empty()) mean_psd.assign(psd.size(), 0.0);
    for (std::size_t k = 0; k < psd.size(); ++k) mean_psd[k] += psd[k];
  }
  for (double& v : mean_psd) v /= static_cast<double>(count);

  const std::size_t n = mean_psd.size();
  const double df = cfg.sample_rate_hz / static_cast<double>(n);
  BandSummary summary;
  summary.freq_hz.resize(n);
  summary.psd_db.resize(n);
  // reorder to a centered axis so the summary reads -fs/2 .. fs/2
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = (i + n / 2) % n;  // bin index in fft order
    const double f = (static_cast<double>(i) - static_cast<double>(n / 2)) * df;
    summary.freq_hz[i] = f;
    summary.psd_db[i] = 10.0 * std::log10(mean_psd[k] + 1e-300);
  }

  std::size_t peak = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (summary.psd_db[i] > summary.psd_db[peak]) peak = i;
  summary.peak_hz = summary.freq_hz[peak];
  const double threshold = summary.psd_db[peak] - 20.0;
  std::size_t lo = peak, hi = peak;
  for (std::size_t i = 0; i < n; ++i) {
    if (summary.psd_db[i] >= threshold) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  summary.low_edge_hz = summary.freq_hz[lo];
  summary.high_edge_hz = summary.freq_hz[hi];

  summary.notes.push_back("averaged spectra: " + std::to_string(count));
  summary.notes.push_back("peak " + format_double(summary.peak_hz) + " hz, -20 dB extent " +
                          format_double(summary.low_edge_hz) + " .. " +
                          format_double(summary.high_edge_hz) + " hz");
  const double suggest_low = std::max(1e3, summary.low_edge_hz);
  const double suggest_high =
      std::min(0.45 * cfg.sample_rate_hz, std::max(suggest_low * 2.0, summary.high_edge_hz));
  if (summary.high_edge_hz <= 0.0)
    summary.notes.push_back("no positive-frequency content above the -20 dB threshold");
  else
    summary.notes.push_back("suggested band: " + format_double(suggest_low) + " .. " +
                            format_double(suggest_high) + " hz");
  const double extent = std::max(std::abs(summary.low_edge_hz),
                                 std::abs(summary.high_edge_hz));
  if (extent > cfg.band_high_hz)
    summary.notes.push_back("warning: spectral content reaches " + format_double(extent) +
                            " hz, beyond the configured band edge " +
                            format_double(cfg.band_high_hz) + " hz");
  return summary;
}

}  // namespace rfsc
