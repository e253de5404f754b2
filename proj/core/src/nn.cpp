#include "textplan/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace textplan::nn {

Mat glorot(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(std::max(cols, 1)));
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

Tape::Node& Tape::push(Op op, int a, int b) {
  if (used_ == nodes_.size()) nodes_.emplace_back();
  Node& n = nodes_[used_++];
  n.op = op;
  n.a = a;
  n.b = b;
  n.s = 0;
  n.sink = nullptr;
  return n;
}

void Tape::reset() {
  used_ = 0;
  leaf_cache_.clear();
}

Var Tape::leaf(Tensor& t) {
  auto it = leaf_cache_.find(&t);
  if (it != leaf_cache_.end()) return Var{it->second};
  Node& n = push(kLeaf);
  n.val = t.v;
  n.sink = &t;
  int idx = static_cast<int>(used_ - 1);
  leaf_cache_.emplace(&t, idx);
  return Var{idx};
}

Var Tape::constant(const Mat& value) {
  Node& n = push(kConst);
  n.val = value;
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::add(Var a, Var b) {
  Node& n = push(kAdd, a.idx, b.idx);
  n.val = nodes_[a.idx].val + nodes_[b.idx].val;
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::sub(Var a, Var b) {
  Node& n = push(kSub, a.idx, b.idx);
  n.val = nodes_[a.idx].val - nodes_[b.idx].val;
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::matmul(Var a, Var b) {
  Node& n = push(kMatmul, a.idx, b.idx);
  n.val = nodes_[a.idx].val * nodes_[b.idx].val;
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::cmul(Var a, Var b) {
  Node& n = push(kCmul, a.idx, b.idx);
  n.val = nodes_[a.idx].val.cwiseProduct(nodes_[b.idx].val);
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::scale(Var a, double s) {
  Node& n = push(kScale, a.idx);
  n.s = s;
  n.val = nodes_[a.idx].val * s;
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::rsub(double s, Var a) {
  Node& n = push(kRsub, a.idx);
  n.s = s;
  n.val = (s - nodes_[a.idx].val.array()).matrix();
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::sigmoid(Var a) {
  Node& n = push(kSigmoid, a.idx);
  n.val = (1.0 / (1.0 + (-nodes_[a.idx].val.array()).exp())).matrix();
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::tanh(Var a) {
  Node& n = push(kTanh, a.idx);
  n.val = nodes_[a.idx].val.array().tanh().matrix();
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::exp(Var a) {
  Node& n = push(kExp, a.idx);
  n.val = nodes_[a.idx].val.array().exp().matrix();
  return Var{static_cast<int>(used_ - 1)};
}

namespace {
Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  Eigen::ArrayXd a = x.array() - x.maxCoeff();
  Eigen::ArrayXd e = a.exp();
  return (e / e.sum()).matrix();
}
}  // namespace

Var Tape::softmax_vec(Var a) {
  const Mat& x = nodes_[a.idx].val;
  if (x.cols() != 1) throw std::invalid_argument("softmax_vec: expected column vector");
  Node& n = push(kSoftmaxVec, a.idx);
  n.val = softmax(x.col(0));
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::softmax_cols(Var a) {
  const Mat& x = nodes_[a.idx].val;
  Node& n = push(kSoftmaxCols, a.idx);
  n.val.resize(x.rows(), x.cols());
  for (int c = 0; c < x.cols(); ++c) n.val.col(c) = softmax(x.col(c));
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::rows(Var a, int start, int count) {
  Node& n = push(kRows, a.idx);
  n.r0 = start;
  n.nr = count;
  n.val = nodes_[a.idx].val.middleRows(start, count);
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::transpose(Var a) {
  Node& n = push(kTranspose, a.idx);
  n.val = nodes_[a.idx].val.transpose();
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::cross_entropy(const Mat& target, Var p) {
  Node& n = push(kCrossEntropy, p.idx);
  n.aux = target;
  const Mat& probs = nodes_[p.idx].val;
  double loss = 0;
  for (int i = 0; i < probs.rows(); ++i)
    for (int j = 0; j < probs.cols(); ++j)
      if (target(i, j) != 0.0) loss -= target(i, j) * std::log(probs(i, j) + 1e-300);
  n.val = Mat::Constant(1, 1, loss);
  return Var{static_cast<int>(used_ - 1)};
}

Var Tape::kl_std_normal(Var mu, Var logvar) {
  Node& n = push(kKl, mu.idx, logvar.idx);
  const Mat& m = nodes_[mu.idx].val;
  const Mat& lv = nodes_[logvar.idx].val;
  double kl = 0.5 * (m.array().square() + lv.array().exp() - lv.array() - 1.0).sum();
  n.val = Mat::Constant(1, 1, kl);
  return Var{static_cast<int>(used_ - 1)};
}

void Tape::backward(Var loss) {
  if (nodes_[loss.idx].val.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar");
  for (std::size_t i = 0; i < used_; ++i) {
    Node& n = nodes_[i];
    n.grad = Mat::Zero(n.val.rows(), n.val.cols());
  }
  nodes_[loss.idx].grad(0, 0) = 1.0;

  for (int i = loss.idx; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.isZero(0.0)) continue;
    switch (n.op) {
      case kLeaf:
        if (n.sink) n.sink->g += n.grad;
        break;
      case kConst:
        break;
      case kAdd:
        nodes_[n.a].grad += n.grad;
        nodes_[n.b].grad += n.grad;
        break;
      case kSub:
        nodes_[n.a].grad += n.grad;
        nodes_[n.b].grad -= n.grad;
        break;
      case kMatmul:
        nodes_[n.a].grad.noalias() += n.grad * nodes_[n.b].val.transpose();
        nodes_[n.b].grad.noalias() += nodes_[n.a].val.transpose() * n.grad;
        break;
      case kCmul:
        nodes_[n.a].grad += n.grad.cwiseProduct(nodes_[n.b].val);
        nodes_[n.b].grad += n.grad.cwiseProduct(nodes_[n.a].val);
        break;
      case kScale:
        nodes_[n.a].grad += n.grad * n.s;
        break;
      case kRsub:
        nodes_[n.a].grad -= n.grad;
        break;
      case kSigmoid:
        nodes_[n.a].grad +=
            n.grad.cwiseProduct(n.val.cwiseProduct((1.0 - n.val.array()).matrix()));
        break;
      case kTanh:
        nodes_[n.a].grad +=
            n.grad.cwiseProduct((1.0 - n.val.array().square()).matrix());
        break;
      case kExp:
        nodes_[n.a].grad += n.grad.cwiseProduct(n.val);
        break;
      case kSoftmaxVec: {
        double dot = n.val.col(0).dot(n.grad.col(0));
        nodes_[n.a].grad.col(0) +=
            n.val.col(0).cwiseProduct(n.grad.col(0) - Mat::Constant(n.val.rows(), 1, dot));
        break;
      }
      case kSoftmaxCols:
        for (int c = 0; c < n.val.cols(); ++c) {
          double dot = n.val.col(c).dot(n.grad.col(c));
          nodes_[n.a].grad.col(c) += n.val.col(c).cwiseProduct(
              n.grad.col(c) - Mat::Constant(n.val.rows(), 1, dot));
        }
        break;
      case kRows:
        nodes_[n.a].grad.middleRows(n.r0, n.nr) += n.grad;
        break;
      case kTranspose:
        nodes_[n.a].grad += n.grad.transpose();
        break;
      case kCrossEntropy: {
        double g = n.grad(0, 0);
        const Mat& probs = nodes_[n.a].val;
        for (int r = 0; r < probs.rows(); ++r)
          for (int c = 0; c < probs.cols(); ++c)
            if (n.aux(r, c) != 0.0)
              nodes_[n.a].grad(r, c) -= g * n.aux(r, c) / (probs(r, c) + 1e-300);
        break;
      }
      case kKl: {
        double g = n.grad(0, 0);
        nodes_[n.a].grad += g * nodes_[n.a].val;
        nodes_[n.b].grad.array() +=
            g * 0.5 * (nodes_[n.b].val.array().exp() - 1.0);
        break;
      }
    }
  }
}

void ParamSet::zero_grad() {
  for (auto& [name, t] : items_) t->zero_grad();
}

void ParamSet::sgd_step(double lr) {
  for (auto& [name, t] : items_) t->v -= lr * t->g;
}

double ParamSet::grad_sq_norm() const {
  double s = 0;
  for (const auto& [name, t] : items_) s += t->g.squaredNorm();
  return s;
}

Tensor* ParamSet::find(const std::string& name) const {
  for (const auto& [n, t] : items_)
    if (n == name) return t;
  return nullptr;
}

void GruCell::init(int input_dim, int hidden_dim, std::mt19937_64& rng) {
  for (Tensor* w : {&Wz, &Wr, &Wn}) w->v = glorot(hidden_dim, input_dim, rng);
  for (Tensor* u : {&Uz, &Ur, &Un}) u->v = glorot(hidden_dim, hidden_dim, rng);
  for (Tensor* b : {&bz, &br, &bn}) b->v = Mat::Zero(hidden_dim, 1);
}

void GruCell::register_params(ParamSet& ps, const std::string& prefix) {
  ps.add(prefix + ".Wz", &Wz);
  ps.add(prefix + ".Uz", &Uz);
  ps.add(prefix + ".bz", &bz);
  ps.add(prefix + ".Wr", &Wr);
  ps.add(prefix + ".Ur", &Ur);
  ps.add(prefix + ".br", &br);
  ps.add(prefix + ".Wn", &Wn);
  ps.add(prefix + ".Un", &Un);
  ps.add(prefix + ".bn", &bn);
}

Var GruCell::step(Tape& t, Var x, Var h) {
  Var z = t.sigmoid(
      t.add(t.add(t.matmul(t.leaf(Wz), x), t.matmul(t.leaf(Uz), h)), t.leaf(bz)));
  Var r = t.sigmoid(
      t.add(t.add(t.matmul(t.leaf(Wr), x), t.matmul(t.leaf(Ur), h)), t.leaf(br)));
  Var n = t.tanh(t.add(
      t.add(t.matmul(t.leaf(Wn), x), t.matmul(t.leaf(Un), t.cmul(r, h))), t.leaf(bn)));
  return t.add(t.cmul(t.rsub(1.0, z), h), t.cmul(z, n));
}

void Affine::init(int in_dim, int out_dim, std::mt19937_64& rng) {
  W.v = glorot(out_dim, in_dim, rng);
  b.v = Mat::Zero(out_dim, 1);
}

void Affine::register_params(ParamSet& ps, const std::string& prefix) {
  ps.add(prefix + ".W", &W);
  ps.add(prefix + ".b", &b);
}

Var Affine::apply(Tape& tape, Var x) {
  return tape.add(tape.matmul(tape.leaf(W), x), tape.leaf(b));
}

}  // namespace textplan::nn
