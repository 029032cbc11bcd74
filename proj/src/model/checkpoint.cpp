#include "keratix/model/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "keratix/core/error.hpp"
#include "keratix/core/manifest.hpp"

namespace fs = std::filesystem;

namespace keratix::model {

namespace {

constexpr const char* kMagic = "keratix-checkpoint";
constexpr int kVersion = 1;

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) throw FormatError("checkpoint truncated", row_);
    ++row_;
    return s;
  }

  std::vector<std::string> words() {
    std::istringstream ss(line());
    std::vector<std::string> w;
    for (std::string t; ss >> t;) w.push_back(t);
    return w;
  }

  double real() {
    const std::string s = line();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad checkpoint value '" + s + "'", row_);
    return v;
  }

  std::size_t row() const { return row_; }

 private:
  std::istream& in_;
  std::size_t row_ = 0;
};

std::size_t to_size(const std::string& s, std::size_t row) {
  try {
    return static_cast<std::size_t>(std::stoull(s));
  } catch (const std::exception&) {
    throw FormatError("bad checkpoint integer '" + s + "'", row);
  }
}

}  // namespace

void save_checkpoint(const Model& model, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const ModelConfig& c = model.config;
  out << kMagic << ' ' << kVersion << '\n';
  out << "variant " << variant_name(c.variant) << '\n';
  out << "task " << task_name(c.task) << '\n';
  out << "trunk " << trunk_name(c.trunk) << '\n';
  out << "input_dim " << c.input_dim << '\n';
  out << "image_size " << c.image_size << '\n';
  out << "hidden " << c.hidden << '\n';
  out << "dropout " << format_real(c.dropout_p) << '\n';
  out << "batchnorm " << (c.use_batchnorm ? 1 : 0) << '\n';
  out << "blocks " << model.layout.size() << '\n';
  for (const ParamBlock& b : model.layout) {
    out << "block " << b.name << ' ' << b.rows << ' ' << b.cols << ' ' << (b.trunk ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < b.size(); ++i) out << format_real(model.params[b.offset + i]) << '\n';
  }
  out << "running_mean " << model.running_mean.size() << '\n';
  for (double v : model.running_mean) out << format_real(v) << '\n';
  out << "running_var " << model.running_var.size() << '\n';
  for (double v : model.running_var) out << format_real(v) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Model load_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  Reader r(in);
  const auto head = r.words();
  if (head.size() != 2 || head[0] != kMagic) throw FormatError("not a keratix checkpoint", r.row());
  if (to_size(head[1], r.row()) != static_cast<std::size_t>(kVersion)) {
    throw FormatError("unsupported checkpoint version " + head[1], r.row());
  }
  std::map<std::string, std::string> kv;
  std::vector<std::string> w;
  while (true) {
    w = r.words();
    if (w.size() != 2) throw FormatError("malformed checkpoint header line", r.row());
    if (w[0] == "blocks") break;
    kv[w[0]] = w[1];
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("checkpoint lacks '") + key + "'", r.row());
    return it->second;
  };
  ModelConfig c;
  c.variant = parse_variant(need("variant"));
  c.task = parse_task(need("task"));
  c.trunk = parse_trunk(need("trunk"));
  c.input_dim = to_size(need("input_dim"), r.row());
  c.image_size = to_size(need("image_size"), r.row());
  c.hidden = to_size(need("hidden"), r.row());
  c.dropout_p = std::stod(need("dropout"));
  c.use_batchnorm = need("batchnorm") == "1";

  Model model = Model::create(c);
  const std::size_t count = to_size(w[1], r.row());
  if (count != model.layout.size()) throw FormatError("checkpoint block count does not match its config", r.row());
  for (const ParamBlock& b : model.layout) {
    const auto bw = r.words();
    if (bw.size() != 5 || bw[0] != "block" || bw[1] != b.name || to_size(bw[2], r.row()) != b.rows ||
        to_size(bw[3], r.row()) != b.cols) {
      throw FormatError("checkpoint block '" + b.name + "' has the wrong shape", r.row());
    }
    for (std::size_t i = 0; i < b.size(); ++i) model.params[b.offset + i] = r.real();
  }
  for (auto* stats : {&model.running_mean, &model.running_var}) {
    const auto sw = r.words();
    if (sw.size() != 2 || to_size(sw[1], r.row()) != stats->size()) {
      throw FormatError("checkpoint batch-norm statistics have the wrong shape", r.row());
    }
    for (double& v : *stats) v = r.real();
  }
  return model;
}

}  // namespace keratix::model
