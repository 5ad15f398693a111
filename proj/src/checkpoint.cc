#include "vfo/checkpoint.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace vfo {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, end);
}

namespace {

double parse_double(const std::string& token) {
  double value = 0.0;
  auto [end, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw std::runtime_error("checkpoint: bad number '" + token + "'");
  }
  return value;
}

std::string layer_name(const std::string& prefix, std::size_t i,
                       const char* field) {
  return prefix + "/layer" + std::to_string(i) + "/" + field;
}

}  // namespace

void Checkpoint::put(const std::string& name, Tensor tensor) {
  if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
    throw std::invalid_argument("checkpoint entry names must be non-empty tokens");
  }
  if (tensor.rows < 0 || tensor.cols < 0 ||
      static_cast<std::size_t>(tensor.rows * tensor.cols) != tensor.values.size()) {
    throw std::invalid_argument("checkpoint tensor shape does not match values");
  }
  entries_[name] = std::move(tensor);
}

void Checkpoint::put_vector(const std::string& name, const Vec& values) {
  put(name, {1, static_cast<long>(values.size()),
             std::vector<double>(values.data(), values.data() + values.size())});
}

void Checkpoint::put_scalar(const std::string& name, double value) {
  put(name, {1, 1, {value}});
}

void Checkpoint::put_net(const std::string& prefix, const nn::DenseNet& net) {
  const auto& layers = net.params().layers;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& w = layers[i].weight;
    put(layer_name(prefix, i, "weight"),
        {static_cast<long>(w.rows()), static_cast<long>(w.cols()),
         std::vector<double>(w.data(), w.data() + w.size())});
    put_vector(layer_name(prefix, i, "bias"), layers[i].bias);
  }
}

bool Checkpoint::contains(const std::string& name) const {
  return entries_.count(name) > 0;
}

const Checkpoint::Tensor& Checkpoint::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::out_of_range("checkpoint has no entry '" + name + "'");
  }
  return it->second;
}

Vec Checkpoint::get_vector(const std::string& name) const {
  const auto& t = get(name);
  return Eigen::Map<const Vec>(t.values.data(),
                               static_cast<Eigen::Index>(t.values.size()));
}

double Checkpoint::get_scalar(const std::string& name) const {
  const auto& t = get(name);
  if (t.values.size() != 1) throw std::runtime_error(name + " is not a scalar");
  return t.values[0];
}

bool Checkpoint::contains_net(const std::string& prefix) const {
  return contains(layer_name(prefix, 0, "weight"));
}

nn::DenseNet Checkpoint::get_net(const std::string& prefix) const {
  std::vector<int> dims;
  std::size_t n = 0;
  while (contains(layer_name(prefix, n, "weight"))) {
    const auto& w = get(layer_name(prefix, n, "weight"));
    if (n == 0) dims.push_back(static_cast<int>(w.rows));
    if (dims.back() != w.rows) {
      throw ShapeError("checkpoint layers of '" + prefix + "' do not chain");
    }
    dims.push_back(static_cast<int>(w.cols));
    ++n;
  }
  if (n == 0) throw std::out_of_range("checkpoint has no net '" + prefix + "'");
  nn::DenseNet net(dims);
  nn::ParamSet params = net.params();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = get(layer_name(prefix, i, "weight"));
    const auto& b = get(layer_name(prefix, i, "bias"));
    if (static_cast<int>(b.values.size()) != dims[i + 1]) {
      throw ShapeError("checkpoint bias of '" + prefix + "' has wrong size");
    }
    params.layers[i].weight =
        Eigen::Map<const Mat>(w.values.data(), w.rows, w.cols);
    params.layers[i].bias = Eigen::Map<const Vec>(b.values.data(), dims[i + 1]);
  }
  net.set_params(std::move(params));
  return net;
}

std::string Checkpoint::serialize() const {
  std::string out = "vfo-checkpoint 1\n" + std::to_string(entries_.size()) + "\n";
  for (const auto& [name, t] : entries_) {
    out += name + " " + std::to_string(t.rows) + " " + std::to_string(t.cols) + "\n";
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      if (i > 0) out += ' ';
      out += format_double(t.values[i]);
    }
    out += '\n';
  }
  return out;
}

Checkpoint Checkpoint::parse(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version >> count) || magic != "vfo-checkpoint" ||
      version != 1) {
    throw std::runtime_error("not a vfo checkpoint (version 1)");
  }
  Checkpoint ckpt;
  for (std::size_t e = 0; e < count; ++e) {
    std::string name;
    Tensor t;
    if (!(in >> name >> t.rows >> t.cols) || t.rows < 0 || t.cols < 0) {
      throw std::runtime_error("checkpoint: truncated entry header");
    }
    t.values.resize(static_cast<std::size_t>(t.rows * t.cols));
    std::string token;
    for (auto& v : t.values) {
      if (!(in >> token)) throw std::runtime_error("checkpoint: truncated values");
      v = parse_double(token);
    }
    ckpt.put(name, std::move(t));
  }
  return ckpt;
}

void Checkpoint::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint Checkpoint::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (const auto& [name, t] : entries_) {
    auto it = other.entries_.find(name);
    if (it == other.entries_.end()) return false;
    const auto& u = it->second;
    if (t.rows != u.rows || t.cols != u.cols || t.values != u.values) return false;
  }
  return true;
}

}  // namespace vfo
