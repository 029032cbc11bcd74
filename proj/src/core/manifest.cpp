#include "keratix/core/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_set>

#include "keratix/core/error.hpp"
#include "keratix/core/image.hpp"

namespace fs = std::filesystem;

namespace keratix {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

long parse_int(const std::string& field, const char* name, std::size_t row) {
  long value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(std::string("field '") + name + "' is not an integer: '" + field + "'", row);
  }
  return value;
}

double parse_double(const std::string& field, const char* name, std::size_t row) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(std::string("field '") + name + "' is not a number: '" + field + "'", row);
  }
  return value;
}

bool parse_bool(const std::string& field, std::size_t row) {
  if (field == "1" || field == "true") return true;
  if (field == "0" || field == "false") return false;
  throw FormatError("field 'mirrored' is not a boolean: '" + field + "'", row);
}

void check_bit(const Case& c, const char* field, long value) {
  if (value != 0 && value != 1) {
    throw ValidationError("case '" + c.case_id + "': field '" + field + "' must be 0 or 1");
  }
}

std::string kind_name(PayloadKind kind) {
  return kind == PayloadKind::image ? "image" : "features";
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("cannot format real");
  return std::string(buf, ptr);
}

void validate_case(const Case& c) {
  if (c.case_id.empty()) throw ValidationError("case with empty case_id");
  if (c.group_id.empty()) throw ValidationError("case '" + c.case_id + "': field 'group_id' is empty");
  check_bit(c, "bacteria", c.labels.bacteria);
  check_bit(c, "fungi", c.labels.fungi);
  check_bit(c, "amoeba", c.labels.amoeba);
  check_bit(c, "sex", c.sex);
  if (c.labels.joint_index() == 0) {
    throw ValidationError("case '" + c.case_id + "': no infection (bacteria, fungi, amoeba all 0)");
  }
  if (c.age_bin > 3) {
    throw ValidationError("case '" + c.case_id + "': field 'age_bin' must be in 0..3");
  }
}

void validate_manifest(const DatasetManifest& manifest) {
  std::unordered_set<std::string> ids;
  std::map<std::string, const Case*> group_source;
  std::optional<std::size_t> dim;
  for (const Case& c : manifest.cases) {
    validate_case(c);
    if (!ids.insert(c.case_id).second) {
      throw ValidationError("case '" + c.case_id + "': field 'case_id' is not unique");
    }
    if (const auto* fv = std::get_if<FeatureVector>(&c.payload)) {
      if (fv->empty()) throw ValidationError("case '" + c.case_id + "': field 'payload_ref' is empty");
      if (dim && *dim != fv->size()) {
        throw ValidationError("case '" + c.case_id + "': field 'payload_ref' has dimension " +
                              std::to_string(fv->size()) + ", expected " + std::to_string(*dim));
      }
      dim = fv->size();
    }
  }
  // Mirrored twins share the labels of the original case in their group.
  for (const Case& c : manifest.cases) {
    if (!c.mirrored) group_source.try_emplace(c.group_id, &c);
  }
  for (const Case& c : manifest.cases) {
    if (!c.mirrored) continue;
    auto it = group_source.find(c.group_id);
    if (it == group_source.end()) {
      throw ValidationError("case '" + c.case_id + "': field 'group_id' has no original case");
    }
    if (!(it->second->labels == c.labels)) {
      throw ValidationError("case '" + c.case_id + "': field 'labels' differ from its source case");
    }
  }
}

bool has_mirrored(const DatasetManifest& manifest) {
  for (const Case& c : manifest.cases) {
    if (c.mirrored) return true;
  }
  return false;
}

DatasetManifest mirror_expand(const DatasetManifest& manifest) {
  if (has_mirrored(manifest)) {
    throw ValidationError("manifest already contains mirrored cases; double expansion is not allowed");
  }
  DatasetManifest out;
  out.metadata = manifest.metadata;
  out.cases.reserve(manifest.cases.size() * 2);
  out.cases = manifest.cases;
  for (const Case& src : manifest.cases) {
    Case twin = src;
    twin.case_id = src.case_id + "_m";
    twin.mirrored = true;
    if (const auto* img = std::get_if<ImageTensor>(&src.payload)) {
      twin.payload = flip_horizontal(*img);
    }
    out.cases.push_back(std::move(twin));
  }
  return out;
}

FeatureVector read_feature_vector(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file " + path.string());
  FeatureVector values;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty()) continue;
    values.push_back(parse_double(t, "feature", row));
  }
  return values;
}

void write_feature_vector(std::span<const double> values, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write feature file " + path.string());
  for (double v : values) out << format_real(v) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

// Next whitespace-delimited token of a PPM header, skipping comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

ImageTensor read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file " + path.string());
  const std::string magic = ppm_token(in);
  if (magic != "P6" && magic != "P3") throw FormatError("not a PPM image: " + path.string());
  long width = 0;
  long height = 0;
  long maxval = 0;
  try {
    width = std::stol(ppm_token(in));
    height = std::stol(ppm_token(in));
    maxval = std::stol(ppm_token(in));
  } catch (const std::exception&) {
    throw FormatError("bad PPM header: " + path.string());
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw FormatError("bad PPM header: " + path.string());
  }
  ImageTensor img(static_cast<std::size_t>(height), static_cast<std::size_t>(width));
  auto values = img.values();
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P3") {
    for (double& v : values) {
      const std::string tok = ppm_token(in);
      if (tok.empty()) throw FormatError("truncated PPM: " + path.string());
      v = std::stod(tok) * scale;
    }
  } else {
    const int bytes = maxval < 256 ? 1 : 2;
    for (double& v : values) {
      unsigned value = 0;
      for (int b = 0; b < bytes; ++b) {
        const int ch = in.get();
        if (ch == EOF) throw FormatError("truncated PPM: " + path.string());
        value = (value << 8) | static_cast<unsigned>(ch);
      }
      v = value * scale;
    }
  }
  return img;
}

void write_ppm(const ImageTensor& image, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image file " + path.string());
  out << "P6\n" << image.width() << ' ' << image.height() << "\n65535\n";
  for (double v : image.values()) {
    const double c = std::clamp(v, 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(c * 65535.0));
    out.put(static_cast<char>(q >> 8));
    out.put(static_cast<char>(q & 0xff));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();

  DatasetManifest manifest;
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  bool kind_declared = false;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto eq = t.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(std::string_view(t).substr(1, eq - 1));
      const std::string value = trim(std::string_view(t).substr(eq + 1));
      if (key == "seed") {
        manifest.metadata.seed = static_cast<std::uint64_t>(parse_int(value, "seed", row));
      } else if (key == "source") {
        manifest.metadata.source = value;
      } else if (key == "kind") {
        if (value != "features" && value != "image") throw FormatError("unknown payload kind", row);
        manifest.metadata.kind = value == "image" ? PayloadKind::image : PayloadKind::feature_vector;
        kind_declared = true;
      }
      continue;
    }
    header = split_csv_line(t);
    break;
  }
  if (header.empty()) throw FormatError("manifest has no header", row);

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required :
       {"case_id", "group_id", "payload_ref", "bacteria", "fungi", "amoeba", "sex", "mirrored"}) {
    if (!col.contains(required)) {
      throw FormatError(std::string("manifest header lacks column '") + required + "'", row);
    }
  }
  const bool years = !col.contains("age_bin");
  if (years && !col.contains("age")) throw FormatError("manifest header lacks column 'age_bin'", row);

  // Image payloads are shared between a case and its mirror; cache by path.
  std::map<fs::path, ImageTensor> image_cache;
  std::map<fs::path, FeatureVector> feature_cache;

  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split_csv_line(t);
    if (f.size() != header.size()) {
      throw FormatError("expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(f.size()),
                        row);
    }
    Case c;
    c.case_id = f[col["case_id"]];
    c.group_id = f[col["group_id"]];
    c.payload_ref = f[col["payload_ref"]];
    const long b = parse_int(f[col["bacteria"]], "bacteria", row);
    const long fu = parse_int(f[col["fungi"]], "fungi", row);
    const long a = parse_int(f[col["amoeba"]], "amoeba", row);
    const long sex = parse_int(f[col["sex"]], "sex", row);
    check_bit(c, "bacteria", b);
    check_bit(c, "fungi", fu);
    check_bit(c, "amoeba", a);
    check_bit(c, "sex", sex);
    c.labels = LabelVector{static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(fu),
                           static_cast<std::uint8_t>(a)};
    c.sex = static_cast<std::uint8_t>(sex);
    if (years) {
      c.age_bin = static_cast<std::uint8_t>(age_bin_from_years(parse_double(f[col["age"]], "age", row)));
    } else {
      const long bin = parse_int(f[col["age_bin"]], "age_bin", row);
      if (bin < 0 || bin > 3) {
        throw ValidationError("case '" + c.case_id + "': field 'age_bin' must be in 0..3");
      }
      c.age_bin = static_cast<std::uint8_t>(bin);
    }
    c.mirrored = parse_bool(f[col["mirrored"]], row);
    validate_case(c);

    if (c.payload_ref.empty()) {
      throw ValidationError("case '" + c.case_id + "': field 'payload_ref' is empty");
    }
    const fs::path ref = base / c.payload_ref;
    if (!fs::exists(ref)) {
      throw ValidationError("case '" + c.case_id + "': field 'payload_ref' does not resolve: " +
                            ref.string());
    }
    const std::string ext = ref.extension().string();
    const bool image = ext == ".ppm" || ext == ".pnm";
    if (image) {
      auto it = image_cache.find(ref);
      if (it == image_cache.end()) it = image_cache.emplace(ref, read_ppm(ref)).first;
      c.payload = c.mirrored ? flip_horizontal(it->second) : it->second;
    } else {
      auto it = feature_cache.find(ref);
      if (it == feature_cache.end()) it = feature_cache.emplace(ref, read_feature_vector(ref)).first;
      c.payload = it->second;
    }
    manifest.cases.push_back(std::move(c));
  }

  if (!manifest.cases.empty()) {
    const Payload& first = manifest.cases.front().payload;
    const PayloadKind kind = is_image(first) ? PayloadKind::image : PayloadKind::feature_vector;
    if (kind_declared && kind != manifest.metadata.kind) {
      throw ValidationError("manifest declares kind '" + kind_name(manifest.metadata.kind) +
                            "' but payloads are '" + kind_name(kind) + "'");
    }
    manifest.metadata.kind = kind;
    for (const Case& c : manifest.cases) {
      if (is_image(c.payload) != (kind == PayloadKind::image)) {
        throw ValidationError("case '" + c.case_id + "': field 'payload_ref' mixes payload kinds");
      }
    }
    if (kind == PayloadKind::feature_vector) {
      manifest.metadata.feature_dim = std::get<FeatureVector>(first).size();
    } else {
      manifest.metadata.image_size = std::get<ImageTensor>(first).height();
    }
  }
  validate_manifest(manifest);
  return manifest;
}

void save_manifest(DatasetManifest& manifest, const fs::path& path) {
  const fs::path base = path.parent_path();
  const fs::path payload_dir = base / "payloads";
  std::map<std::string, std::string> ref_by_group;
  for (Case& c : manifest.cases) {
    if (!c.payload_ref.empty()) {
      if (!c.mirrored) ref_by_group.try_emplace(c.group_id, c.payload_ref);
      continue;
    }
    if (c.mirrored) continue;
    fs::create_directories(payload_dir);
    if (const auto* img = std::get_if<ImageTensor>(&c.payload)) {
      c.payload_ref = "payloads/" + c.case_id + ".ppm";
      write_ppm(*img, base / c.payload_ref);
    } else {
      c.payload_ref = "payloads/" + c.case_id + ".txt";
      write_feature_vector(std::get<FeatureVector>(c.payload), base / c.payload_ref);
    }
    ref_by_group.try_emplace(c.group_id, c.payload_ref);
  }
  // A mirrored twin points at its source payload; the flip is reapplied on load.
  for (Case& c : manifest.cases) {
    if (!c.mirrored || !c.payload_ref.empty()) continue;
    auto it = ref_by_group.find(c.group_id);
    if (it == ref_by_group.end()) {
      throw ValidationError("case '" + c.case_id + "': mirrored case has no source payload");
    }
    c.payload_ref = it->second;
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "#seed=" << manifest.metadata.seed << '\n';
  out << "#source=" << manifest.metadata.source << '\n';
  out << "#kind=" << kind_name(manifest.metadata.kind) << '\n';
  out << kManifestHeader << '\n';
  for (const Case& c : manifest.cases) {
    out << c.case_id << ',' << c.group_id << ',' << c.payload_ref << ',' << int(c.labels.bacteria)
        << ',' << int(c.labels.fungi) << ',' << int(c.labels.amoeba) << ',' << int(c.sex) << ','
        << int(c.age_bin) << ',' << (c.mirrored ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace keratix
