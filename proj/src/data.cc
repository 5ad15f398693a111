#include "vfo/data.h"

#include <zlib.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace vfo {

using nlohmann::json;

std::string origin_tag(Origin origin) {
  return origin == Origin::kExpert ? "E" : "B";
}

Origin parse_origin(const std::string& tag) {
  if (tag == "E") return Origin::kExpert;
  if (tag == "B") return Origin::kBackground;
  throw std::invalid_argument("unknown dataset origin '" + tag + "'");
}

std::size_t Dataset::num_transitions() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.num_transitions();
  return n;
}

std::size_t Dataset::num_states() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.states.size();
  return n;
}

bool Dataset::has_actions() const {
  if (trajectories.empty()) return false;
  for (const auto& t : trajectories) {
    if (!t.actions) return false;
  }
  return true;
}

bool Dataset::has_rewards() const {
  if (trajectories.empty()) return false;
  for (const auto& t : trajectories) {
    if (!t.rewards) return false;
  }
  return true;
}

double Dataset::mean_return() const {
  if (trajectories.empty()) throw std::logic_error("mean_return of empty dataset");
  double sum = 0.0;
  for (const auto& t : trajectories) sum += t.total_return();
  return sum / static_cast<double>(trajectories.size());
}

void Dataset::validate() const {
  Eigen::Index dim = -1;
  for (const auto& t : trajectories) {
    t.validate();
    if (dim < 0) dim = t.states.front().size();
    if (t.states.front().size() != dim) {
      throw std::invalid_argument("dataset mixes state dimensions");
    }
    if (origin == Origin::kExpert && t.actions) {
      throw std::invalid_argument("expert trajectories must not carry actions");
    }
    if (origin == Origin::kBackground && !t.actions) {
      throw std::invalid_argument("background trajectories must carry actions");
    }
  }
}

namespace {

bool same_vectors(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size() || a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

bool Dataset::operator==(const Dataset& other) const {
  if (origin != other.origin || env_name != other.env_name ||
      metadata != other.metadata ||
      trajectories.size() != other.trajectories.size()) {
    return false;
  }
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& a = trajectories[i];
    const auto& b = other.trajectories[i];
    if (a.terminated != b.terminated || a.truncated != b.truncated) return false;
    if (!same_vectors(a.states, b.states)) return false;
    if (a.actions.has_value() != b.actions.has_value()) return false;
    if (a.actions && !same_vectors(*a.actions, *b.actions)) return false;
    if (a.rewards != b.rewards) return false;
  }
  return true;
}

std::vector<Transition> transitions(const Dataset& dataset) {
  std::vector<Transition> out;
  out.reserve(dataset.num_transitions());
  for (const auto& traj : dataset.trajectories) {
    const std::size_t n = traj.num_transitions();
    for (std::size_t i = 0; i < n; ++i) {
      Transition tr;
      tr.s = traj.states[i];
      tr.s_next = traj.states[i + 1];
      tr.z = dataset.origin;
      if (dataset.origin == Origin::kBackground && traj.actions) {
        tr.a = (*traj.actions)[i];
      }
      if (traj.rewards) tr.env_reward = (*traj.rewards)[i];
      const bool last = i + 1 == n;
      tr.is_terminal = last && traj.terminated;
      tr.is_truncation_boundary = last && traj.truncated;
      out.push_back(std::move(tr));
    }
  }
  return out;
}

std::vector<Vec> all_states(const Dataset& dataset) {
  std::vector<Vec> out;
  out.reserve(dataset.num_states());
  for (const auto& traj : dataset.trajectories) {
    out.insert(out.end(), traj.states.begin(), traj.states.end());
  }
  return out;
}

Dataset strip_actions(const Dataset& dataset) {
  Dataset out = dataset;
  out.origin = Origin::kExpert;
  for (auto& traj : out.trajectories) {
    traj.actions.reset();
    traj.rewards.reset();
  }
  return out;
}

MixtureSampler::MixtureSampler(const Dataset& expert, const Dataset& background,
                               double alpha, std::uint64_t seed)
    : expert_(transitions(expert)),
      background_(transitions(background)),
      alpha_(alpha),
      rng_(seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("mixture alpha must lie strictly inside (0, 1)");
  }
  if (expert.origin != Origin::kExpert || background.origin != Origin::kBackground) {
    throw std::invalid_argument("mixture needs an expert and a background dataset");
  }
  if (expert_.empty() || background_.empty()) {
    throw std::invalid_argument("mixture sampling from an empty dataset");
  }
}

TransitionBatch MixtureSampler::sample_batch(std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  TransitionBatch batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const auto& pool = uniform01(rng_) < alpha_ ? background_ : expert_;
    batch.push_back(&pool[uniform_index(rng_, pool.size())]);
  }
  return batch;
}

UniformSampler::UniformSampler(std::vector<Transition> pool, std::uint64_t seed)
    : pool_(std::move(pool)), rng_(seed) {
  if (pool_.empty()) throw std::invalid_argument("sampling from an empty dataset");
}

TransitionBatch UniformSampler::sample_batch(std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  TransitionBatch batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    batch.push_back(&pool_[uniform_index(rng_, pool_.size())]);
  }
  return batch;
}

Normalizer::Normalizer(Vec mean, Vec variance, std::size_t count, double clip)
    : mean_(std::move(mean)), variance_(std::move(variance)), count_(count), clip_(clip) {
  if (mean_.size() != variance_.size()) throw ShapeError("normalizer shape mismatch");
  if (!(clip_ > 0)) throw std::invalid_argument("normalizer clip must be positive");
  inv_std_ = variance_.cwiseMax(kVarianceFloor).cwiseSqrt().cwiseInverse();
}

Normalizer Normalizer::identity(int dim) {
  Normalizer n(Vec::Zero(dim), Vec::Ones(dim), 0, 1e300);
  return n;
}

Normalizer Normalizer::fit(const std::vector<const Dataset*>& datasets, double clip) {
  // Welford accumulation over every state.
  Vec mean;
  Vec m2;
  std::size_t count = 0;
  for (const Dataset* ds : datasets) {
    for (const auto& traj : ds->trajectories) {
      for (const auto& s : traj.states) {
        if (count == 0) {
          mean = Vec::Zero(s.size());
          m2 = Vec::Zero(s.size());
        } else if (s.size() != mean.size()) {
          throw ShapeError("normalizer fit on mixed state dimensions");
        }
        ++count;
        const Vec delta = s - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta.cwiseProduct(s - mean);
      }
    }
  }
  if (count == 0) throw std::invalid_argument("normalizer needs at least one state");
  return Normalizer(mean, m2 / static_cast<double>(count), count, clip);
}

Vec Normalizer::apply(const Vec& state) const {
  if (state.size() != mean_.size()) throw ShapeError("normalizer dimension mismatch");
  return ((state - mean_).cwiseProduct(inv_std_)).cwiseMax(-clip_).cwiseMin(clip_);
}

Mat Normalizer::apply(const Mat& states) const {
  if (states.cols() != mean_.size()) throw ShapeError("normalizer dimension mismatch");
  Mat out = states;
  out.rowwise() -= mean_.transpose();
  out.array().rowwise() *= inv_std_.transpose().array();
  return out.cwiseMax(-clip_).cwiseMin(clip_);
}

Mat stack_states(const TransitionBatch& batch, bool next) {
  if (batch.empty()) return Mat();
  const auto dim = batch.front()->s.size();
  Mat out(static_cast<Eigen::Index>(batch.size()), dim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        (next ? batch[i]->s_next : batch[i]->s).transpose();
  }
  return out;
}

Mat stack_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) return Mat();
  Mat out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return out;
}

// Serialization

namespace {

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json vecs_to_json(const std::vector<Vec>& vs) {
  json arr = json::array();
  for (const auto& v : vs) arr.push_back(vec_to_json(v));
  return arr;
}

std::vector<Vec> json_to_vecs(const json& arr) {
  std::vector<Vec> out;
  out.reserve(arr.size());
  for (const auto& row : arr) {
    Vec v(static_cast<Eigen::Index>(row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = row[i].get<double>();
    }
    out.push_back(std::move(v));
  }
  return out;
}

bool has_gz_extension(const std::filesystem::path& path) {
  return path.extension() == ".gz";
}

}  // namespace

std::string serialize_dataset(const Dataset& dataset) {
  json header;
  header["format"] = "vfo-dataset";
  header["version"] = 1;
  header["env_name"] = dataset.env_name;
  header["origin"] = origin_tag(dataset.origin);
  header["metadata"] = json::object();
  for (const auto& [k, v] : dataset.metadata) header["metadata"][k] = v;

  std::string out = header.dump() + "\n";
  for (const auto& traj : dataset.trajectories) {
    json line;
    line["states"] = vecs_to_json(traj.states);
    if (traj.actions) line["actions"] = vecs_to_json(*traj.actions);
    if (traj.rewards) line["rewards"] = *traj.rewards;
    line["terminated"] = traj.terminated;
    line["truncated"] = traj.truncated;
    out += line.dump() + "\n";
  }
  return out;
}

Dataset parse_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset file is empty");
  Dataset ds;
  try {
    const json header = json::parse(line);
    if (header.at("format").get<std::string>() != "vfo-dataset" ||
        header.at("version").get<int>() != 1) {
      throw std::runtime_error("unsupported dataset format or version");
    }
    ds.env_name = header.at("env_name").get<std::string>();
    ds.origin = parse_origin(header.at("origin").get<std::string>());
    if (header.contains("metadata")) {
      for (const auto& [k, v] : header["metadata"].items()) {
        ds.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json obj = json::parse(line);
      Trajectory traj;
      traj.states = json_to_vecs(obj.at("states"));
      if (obj.contains("actions")) traj.actions = json_to_vecs(obj["actions"]);
      if (obj.contains("rewards")) {
        traj.rewards = obj["rewards"].get<std::vector<double>>();
      }
      traj.terminated = obj.value("terminated", false);
      traj.truncated = obj.value("truncated", false);
      ds.trajectories.push_back(std::move(traj));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed dataset: ") + e.what());
  }
  ds.validate();
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  const std::string text = serialize_dataset(dataset);
  if (has_gz_extension(path)) {
    gzFile file = gzopen(path.string().c_str(), "wb");
    if (file == nullptr) throw std::runtime_error("cannot write " + path.string());
    const int written = gzwrite(file, text.data(), static_cast<unsigned>(text.size()));
    const int closed = gzclose(file);
    if (written != static_cast<int>(text.size()) || closed != Z_OK) {
      throw std::runtime_error("failed writing " + path.string());
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::string text;
  if (has_gz_extension(path)) {
    gzFile file = gzopen(path.string().c_str(), "rb");
    if (file == nullptr) throw std::runtime_error("cannot read " + path.string());
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(file, buf, sizeof(buf))) > 0) text.append(buf, static_cast<std::size_t>(n));
    const bool failed = n < 0;
    gzclose(file);
    if (failed) throw std::runtime_error("corrupt gzip file " + path.string());
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  return parse_dataset(text);
}

}  // namespace vfo
