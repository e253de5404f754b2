// Minimal reverse-mode automatic differentiation over Eigen matrices.
// A Tape owns the computation graph of one forward pass; backward() sweeps
// it once and accumulates leaf gradients into caller-owned buffers. Node
// storage is reused across reset() calls, so per-example graphs allocate
// only on the first pass.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace textplan::nn {

using Mat = Eigen::MatrixXd;

// Parameter tensor: value plus gradient accumulator.
struct Tensor {
  Mat v;
  Mat g;

  void zero_grad() { g = Mat::Zero(v.rows(), v.cols()); }
};

// Gaussian init scaled by 1/sqrt(fan_in).
Mat glorot(int rows, int cols, std::mt19937_64& rng);

struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

class Tape {
 public:
  Var leaf(Tensor& t);            // gradient accumulates into t.g
  Var constant(const Mat& value);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var matmul(Var a, Var b);
  Var cmul(Var a, Var b);         // elementwise product
  Var scale(Var a, double s);
  Var rsub(double s, Var a);      // s - a, elementwise
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var softmax_vec(Var a);         // column vector
  Var softmax_cols(Var a);        // softmax of each column
  Var rows(Var a, int start, int n);
  Var transpose(Var a);
  // -sum(target .* log(p)); target is data, not differentiated through.
  Var cross_entropy(const Mat& target, Var p);
  // 0.5 * sum(mu^2 + exp(logvar) - logvar - 1)
  Var kl_std_normal(Var mu, Var logvar);

  const Mat& value(Var v) const { return nodes_[v.idx].val; }
  double scalar(Var v) const { return nodes_[v.idx].val(0, 0); }

  // Reverse sweep from a 1x1 node; adds into every leaf's Tensor::g.
  void backward(Var loss);

  void reset();

 private:
  enum Op : std::uint8_t {
    kLeaf, kConst, kAdd, kSub, kMatmul, kCmul, kScale, kRsub, kSigmoid,
    kTanh, kExp, kSoftmaxVec, kSoftmaxCols, kRows, kTranspose, kCrossEntropy,
    kKl
  };
  struct Node {
    Op op;
    int a = -1, b = -1;
    double s = 0;
    int r0 = 0, nr = 0;
    Mat val;
    Mat grad;
    Mat aux;            // op-specific payload (e.g. CE target)
    Tensor* sink = nullptr;
  };

  Node& push(Op op, int a = -1, int b = -1);

  std::vector<Node> nodes_;
  std::size_t used_ = 0;
  std::unordered_map<Tensor*, int> leaf_cache_;
};

// Named parameter collection; the unit of SGD updates and checkpointing.
class ParamSet {
 public:
  void add(const std::string& name, Tensor* t) { items_.push_back({name, t}); }
  void zero_grad();
  void sgd_step(double lr);
  double grad_sq_norm() const;
  const std::vector<std::pair<std::string, Tensor*>>& items() const { return items_; }
  Tensor* find(const std::string& name) const;

 private:
  std::vector<std::pair<std::string, Tensor*>> items_;
};

// Gated recurrent unit over column-vector inputs.
struct GruCell {
  Tensor Wz, Uz, bz, Wr, Ur, br, Wn, Un, bn;

  void init(int input_dim, int hidden_dim, std::mt19937_64& rng);
  void register_params(ParamSet& ps, const std::string& prefix);
  int hidden_dim() const { return static_cast<int>(Uz.v.rows()); }

  // One step: returns new hidden state node.
  Var step(Tape& tape, Var x, Var h);
};

struct Affine {
  Tensor W, b;

  void init(int in_dim, int out_dim, std::mt19937_64& rng);
  void register_params(ParamSet& ps, const std::string& prefix);
  Var apply(Tape& tape, Var x);
};

}  // namespace textplan::nn
