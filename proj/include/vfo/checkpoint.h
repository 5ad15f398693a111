#ifndef VFO_CHECKPOINT_H_
#define VFO_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vfo/nn.h"

namespace vfo {

// Named row-major tensors in a plain-text container:
//
//   vfo-checkpoint 1
//   <entry count>
//   <name> <rows> <cols>
//   <rows*cols values, space separated, shortest round-trip decimal>
//   ...
//
// Entries are written in lexicographic name order. Values round-trip
// bit-exactly. Networks are stored as <prefix>/layer<i>/weight (fan_in x
// fan_out) and <prefix>/layer<i>/bias (1 x fan_out).
class Checkpoint {
 public:
  struct Tensor {
    long rows = 0;
    long cols = 0;
    std::vector<double> values;
  };

  void put(const std::string& name, Tensor tensor);
  void put_vector(const std::string& name, const Vec& values);
  void put_scalar(const std::string& name, double value);
  void put_net(const std::string& prefix, const nn::DenseNet& net);

  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  Vec get_vector(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  bool contains_net(const std::string& prefix) const;
  // Rebuilds a tanh-hidden, identity-output network.
  nn::DenseNet get_net(const std::string& prefix) const;

  const std::map<std::string, Tensor>& entries() const { return entries_; }

  std::string serialize() const;
  static Checkpoint parse(const std::string& text);
  void write(const std::filesystem::path& path) const;
  static Checkpoint read(const std::filesystem::path& path);

  bool operator==(const Checkpoint& other) const;

 private:
  std::map<std::string, Tensor> entries_;
};

std::string format_double(double value);

}  // namespace vfo

#endif  // VFO_CHECKPOINT_H_
