#include "rfsc/manifest.hpp"

#include <charconv>
#include <fstream>
#include <span>
#include <sstream>

#include "rfsc/errors.hpp"
#include "rfsc/math.hpp"

namespace rfsc {
namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, std::size_t line_no, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw FormatError("manifest line " + std::to_string(line_no) + ": bad " + what +
                      " value '" + field + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::filesystem::path Manifest::resolve(const ManifestRow& row) const {
  const std::filesystem::path p(row.path);
  return p.is_absolute() ? p : directory / p;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  Manifest manifest;
  manifest.directory = path.has_parent_path() ? path.parent_path()
                                              : std::filesystem::path(".");
  manifest.digest = fnv1a64(
      {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});

  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kManifestHeader)
        throw FormatError("manifest header mismatch, expected '" +
                          std::string(kManifestHeader) + "'");
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 8)
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected 8 fields, got " +
                        std::to_string(fields.size()));
    ManifestRow row;
    row.path = fields[0];
    row.label = fields[1];
    row.kind = fields[2];
    if (row.path.empty())
      throw FormatError("manifest line " + std::to_string(line_no) + ": empty path");
    if (row.label.empty())
      throw FormatError("manifest line " + std::to_string(line_no) + ": empty label");
    if (row.kind != "movement" && row.kind != "workflow")
      throw FormatError("manifest line " + std::to_string(line_no) + ": kind must be 'movement' or 'workflow'");
    row.speed_mm_s = parse_double(fields[3], line_no, "speed_mm_s");
    row.distance_mm = parse_double(fields[4], line_no, "distance_mm");
    row.workflow = fields[5];
    row.set_id = static_cast<int>(parse_double(fields[6], line_no, "set_id"));
    std::uint64_t seed = 0;
    const auto res =
        std::from_chars(fields[7].data(), fields[7].data() + fields[7].size(), seed);
    if (res.ec != std::errc() || res.ptr != fields[7].data() + fields[7].size())
      throw FormatError("manifest line " + std::to_string(line_no) + ": bad seed value '" +
                        fields[7] + "'");
    row.seed = seed;
    manifest.rows.push_back(std::move(row));
  }
  if (manifest.rows.empty()) throw EmptyInputError("manifest has no rows");
  return manifest;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << kManifestHeader << "\n";
  for (const ManifestRow& r : rows) {
    out << r.path << ',' << r.label << ',' << r.kind << ',' << format_double(r.speed_mm_s)
        << ',' << format_double(r.distance_mm) << ',' << r.workflow << ',' << r.set_id
        << ',' << r.seed << "\n";
  }
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace rfsc
