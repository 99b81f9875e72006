#include "pinnlab/autodiff/kernel.hpp"

#include <omp.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pinnlab/errors.hpp"

namespace pinnlab::ad {
namespace {

using Eigen::ArrayXXd;
using Eigen::Index;
using Eigen::MatrixXd;

struct Block {
  int group{-1};  // -1: residual group, otherwise constraint index
  std::size_t term_begin{0};
  std::size_t term_end{0};
  std::size_t batch{0};
};

/// Jets of every layer for one block. Columns are component-major:
/// component c of point j lives in column c*m + j.
struct JetStack {
  MatrixXd input;
  std::vector<MatrixXd> pre;
  std::vector<MatrixXd> act;
  MatrixXd output;
};

struct BlockCache {
  JetStack stack;
  std::vector<double> values;  // terms x width
  std::vector<double> jac;     // terms x width x (arity * outputs * C)
  std::vector<double, Eigen::aligned_allocator<double>> grad;
  MatrixXd ybar;
  MatrixXd abar;
  MatrixXd zbar;
  std::size_t failed_term{std::numeric_limits<std::size_t>::max()};
};

int thread_count(const KernelOptions& o) { return o.threads > 0 ? o.threads : omp_get_max_threads(); }

// tanh via exp(-2|z|): vectorises, absolute error ~1e-16.
template <class In, class Out>
void fast_tanh(const In& z, Out&& t) {
  const ArrayXXd e = (-2.0 * z.abs()).exp();
  t = z.sign() * (1.0 - e) / (1.0 + e);
}

void fill_input(const Stencil& st, const MatrixXd& points, Index col_begin, Index m, MatrixXd& input) {
  const int C = st.size();
  input.setZero(points.rows(), C * m);
  input.leftCols(m) = points.middleCols(col_begin, m);
  for (int c = 1; c < C; ++c) {
    const Component& comp = st.component(c);
    if (comp.order == 1) input.block(comp.idx[0], c * m, 1, m).setOnes();
  }
}

void tanh_forward(const Stencil& st, const MatrixXd& Z, MatrixXd& A, Index m) {
  A.resize(Z.rows(), Z.cols());
  fast_tanh(Z.leftCols(m).array(), A.leftCols(m).array());
  const int C = st.size();
  if (C == 1) return;
  const auto T = A.leftCols(m).array();
  const ArrayXXd s1 = 1.0 - T.square();
  ArrayXXd s2, s3;
  if (st.max_order() >= 2) s2 = -2.0 * T * s1;
  if (st.max_order() >= 3) s3 = s1 * (6.0 * T.square() - 2.0);
  const ArrayXXd* s[4] = {nullptr, &s1, &s2, &s3};
  for (int c = 1; c < C; ++c) {
    auto out = A.middleCols(c * m, m).array();
    out.setZero();
    for (const ChainTerm& t : st.terms(c)) {
      const ArrayXXd& sk = *s[t.derivative];
      auto z0 = Z.middleCols(t.factors[0] * m, m).array();
      if (t.num_factors == 1) {
        out += sk * z0;
      } else if (t.num_factors == 2) {
        out += sk * z0 * Z.middleCols(t.factors[1] * m, m).array();
      } else {
        out += sk * z0 * Z.middleCols(t.factors[1] * m, m).array() *
               Z.middleCols(t.factors[2] * m, m).array();
      }
    }
  }
}

void tanh_backward(const Stencil& st, const MatrixXd& Z, const MatrixXd& A, const MatrixXd& Abar,
                   MatrixXd& Zbar, Index m) {
  Zbar.setZero(Z.rows(), Z.cols());
  const int C = st.size();
  const auto T = A.leftCols(m).array();
  const ArrayXXd s1 = 1.0 - T.square();
  ArrayXXd tbar = Abar.leftCols(m).array();
  if (C > 1) {
    ArrayXXd s2, s3;
    if (st.max_order() >= 2) s2 = -2.0 * T * s1;
    if (st.max_order() >= 3) s3 = s1 * (6.0 * T.square() - 2.0);
    const ArrayXXd* s[4] = {nullptr, &s1, &s2, &s3};
    ArrayXXd sbar[4];
    for (int k = 1; k <= st.max_order(); ++k) sbar[k].setZero(Z.rows(), m);
    for (int c = 1; c < C; ++c) {
      const auto ab = Abar.middleCols(c * m, m).array();
      for (const ChainTerm& t : st.terms(c)) {
        const ArrayXXd& sk = *s[t.derivative];
        ArrayXXd& sb = sbar[t.derivative];
        const auto z0 = Z.middleCols(t.factors[0] * m, m).array();
        auto zb0 = Zbar.middleCols(t.factors[0] * m, m).array();
        if (t.num_factors == 1) {
          sb += ab * z0;
          zb0 += ab * sk;
        } else if (t.num_factors == 2) {
          const auto z1 = Z.middleCols(t.factors[1] * m, m).array();
          auto zb1 = Zbar.middleCols(t.factors[1] * m, m).array();
          sb += ab * z0 * z1;
          zb0 += ab * sk * z1;
          zb1 += ab * sk * z0;
        } else {
          const auto z1 = Z.middleCols(t.factors[1] * m, m).array();
          const auto z2 = Z.middleCols(t.factors[2] * m, m).array();
          auto zb1 = Zbar.middleCols(t.factors[1] * m, m).array();
          auto zb2 = Zbar.middleCols(t.factors[2] * m, m).array();
          sb += ab * z0 * z1 * z2;
          zb0 += ab * sk * z1 * z2;
          zb1 += ab * sk * z0 * z2;
          zb2 += ab * sk * z0 * z1;
        }
      }
    }
    // d s1/dt = -2t, d s2/dt = 6t^2 - 2, d s3/dt = 16t - 24t^3
    tbar += sbar[1] * (-2.0 * T);
    if (st.max_order() >= 2) tbar += sbar[2] * (6.0 * T.square() - 2.0);
    if (st.max_order() >= 3) tbar += sbar[3] * (16.0 * T - 24.0 * T.cube());
  }
  Zbar.leftCols(m).array() = tbar * s1;
}

void forward_stack(const nn::NetworkState& net, const Stencil& st, JetStack& s, Index m) {
  const std::size_t H = net.num_hidden();
  s.pre.resize(H);
  s.act.resize(H);
  const MatrixXd* prev = &s.input;
  for (std::size_t l = 0; l < H; ++l) {
    const auto W = net.weights(l);
    s.pre[l].resize(W.rows(), prev->cols());
    s.pre[l].noalias() = W * (*prev);
    s.pre[l].leftCols(m).colwise() += net.biases(l);
    tanh_forward(st, s.pre[l], s.act[l], m);
    prev = &s.act[l];
  }
  const auto W = net.weights(H);
  s.output.resize(W.rows(), prev->cols());
  s.output.noalias() = W * (*prev);
  s.output.leftCols(m).colwise() += net.biases(H);
}

void backward_stack(const nn::NetworkState& net, const Stencil& st, const JetStack& s, Index m,
                    const MatrixXd& ybar, MatrixXd& abar, MatrixXd& zbar, std::span<double> grad) {
  const std::size_t H = net.num_hidden();
  auto accumulate = [&](std::size_t layer, const MatrixXd& delta, const MatrixXd& prev) {
    const auto& sl = net.slice(layer);
    Eigen::Map<MatrixXd> gW(grad.data() + sl.begin, sl.rows, sl.cols);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + sl.bias_begin, sl.rows);
    gW.noalias() += delta * prev.transpose();
    gb += delta.leftCols(m).rowwise().sum();
  };
  const MatrixXd& last = H > 0 ? s.act[H - 1] : s.input;
  accumulate(H, ybar, last);
  abar.noalias() = net.weights(H).transpose() * ybar;
  for (std::size_t l = H; l-- > 0;) {
    tanh_backward(st, s.pre[l], s.act[l], abar, zbar, m);
    accumulate(l, zbar, l > 0 ? s.act[l - 1] : s.input);
    if (l > 0) abar.noalias() = net.weights(l).transpose() * zbar;
  }
}

/// Put stencil component c of a jet slot from a scalar.
template <class S>
void assign_component(JetT<S>& j, const Component& comp, const S& v) {
  switch (comp.order) {
    case 0: j.value() = v; break;
    case 1: j.d(comp.idx[0]) = v; break;
    case 2: j.set2(comp.idx[0], comp.idx[1], v); break;
    default: j.set3(comp.idx[0], comp.idx[1], comp.idx[2], v); break;
  }
}

template <class S>
S read_component(const JetT<S>& j, const Component& comp) {
  switch (comp.order) {
    case 0: return j.value();
    case 1: return j.d(comp.idx[0]);
    case 2: return j.d(comp.idx[0], comp.idx[1]);
    default: return j.d(comp.idx[0], comp.idx[1], comp.idx[2]);
  }
}

/// Residual values and their Jacobian w.r.t. the output jet slots.
void eval_head(const PointGroup& g, int outputs, const JetStack& stack, Index m_pts, std::size_t term_begin,
               std::size_t terms, BlockCache& cache, Tape& tape) {
  const Stencil& st = g.stencil;
  const int C = st.size();
  const int dim = static_cast<int>(g.points.rows());
  const int order = st.max_order();
  const auto slots = static_cast<std::size_t>(g.arity * outputs * C);
  const auto width = static_cast<std::size_t>(g.width);
  cache.values.assign(terms * width, 0.0);
  cache.jac.assign(terms * width * slots, 0.0);
  std::vector<OutputJets<Var>> jets(static_cast<std::size_t>(g.arity),
                                    OutputJets<Var>(static_cast<std::size_t>(outputs)));
  std::vector<double> coords(static_cast<std::size_t>(g.arity * dim));
  std::vector<Var> out(width);
  std::vector<double> adj;
  const MatrixXd& Y = stack.output;
  for (std::size_t k = 0; k < terms; ++k) {
    tape.clear();
    for (int a = 0; a < g.arity; ++a) {
      const Index col = static_cast<Index>(k) * g.arity + a;
      const Index gcol = static_cast<Index>(term_begin + k) * g.arity + a;
      for (int i = 0; i < dim; ++i) coords[static_cast<std::size_t>(a * dim + i)] = g.points(i, gcol);
      for (int o = 0; o < outputs; ++o) {
        JetT<Var> j(dim, order);
        for (int c = 0; c < C; ++c) assign_component(j, st.component(c), tape.input(Y(o, c * m_pts + col)));
        jets[static_cast<std::size_t>(a)][static_cast<std::size_t>(o)] = j;
      }
    }
    for (auto& v : out) v = Var();
    g.eval_var(TermInput<Var>{jets, coords, dim}, out);
    for (std::size_t w = 0; w < width; ++w) {
      const double v = out[w].value();
      cache.values[k * width + w] = v;
      if (!std::isfinite(v)) {
        cache.failed_term = std::min(cache.failed_term, term_begin + k);
        continue;
      }
      if (out[w].is_constant()) continue;
      adj.assign(tape.size(), 0.0);
      adj[out[w].index()] = 1.0;
      tape.backward(adj);
      // Inputs were pushed first, so slot s is tape node s.
      std::copy(adj.begin(), adj.begin() + static_cast<std::ptrdiff_t>(slots),
                cache.jac.begin() + static_cast<std::ptrdiff_t>((k * width + w) * slots));
    }
  }
}

}  // namespace

struct LossEvaluator::Impl {
  LossSpec spec;
  KernelOptions opt;
  std::vector<Block> blocks;
  std::vector<BlockCache> caches;
  ResidualValues residual;
  std::vector<std::vector<double>> constraint_values;
  nn::NetworkState net;
  bool have_forward{false};

  const PointGroup& group(const Block& b) const {
    return b.group < 0 ? spec.residual : spec.constraints[static_cast<std::size_t>(b.group)];
  }
};

LossEvaluator::LossEvaluator(LossSpec spec, KernelOptions options) : impl_(std::make_unique<Impl>()) {
  spec.validate();
  impl_->spec = std::move(spec);
  impl_->opt = options;
  if (impl_->opt.block_size == 0) throw InvalidArgument("block size must be positive");
  const LossSpec& s = impl_->spec;
  const std::size_t m = s.batch_size();
  for (std::size_t b = 0; b < s.batches; ++b) {
    for (std::size_t start = b * m; start < (b + 1) * m; start += impl_->opt.block_size) {
      impl_->blocks.push_back({-1, start, std::min(start + impl_->opt.block_size, (b + 1) * m), b});
    }
  }
  for (std::size_t g = 0; g < s.constraints.size(); ++g) {
    const auto& grp = s.constraints[g];
    const std::size_t per = std::max<std::size_t>(1, impl_->opt.block_size / static_cast<std::size_t>(grp.arity));
    for (std::size_t start = 0; start < grp.num_terms(); start += per) {
      impl_->blocks.push_back({static_cast<int>(g), start, std::min(start + per, grp.num_terms()), 0});
    }
  }
  impl_->caches.resize(impl_->blocks.size());
  impl_->residual.width = s.residual.width;
  impl_->constraint_values.resize(s.constraints.size());
}

LossEvaluator::~LossEvaluator() = default;
LossEvaluator::LossEvaluator(LossEvaluator&&) noexcept = default;
LossEvaluator& LossEvaluator::operator=(LossEvaluator&&) noexcept = default;

const LossSpec& LossEvaluator::spec() const noexcept { return impl_->spec; }

const ResidualValues& LossEvaluator::forward(const nn::NetworkState& net) {
  Impl& im = *impl_;
  const LossSpec& s = im.spec;
  if (net.input_dim() != s.input_dim) throw ShapeError("network input width does not match loss points");
  if (net.output_dim() != s.outputs) throw ShapeError("network output width does not match loss spec");
  im.net = net;
  im.have_forward = false;
  const auto nblocks = static_cast<std::ptrdiff_t>(im.blocks.size());
#pragma omp parallel num_threads(thread_count(im.opt))
  {
    Tape tape;
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t bi = 0; bi < nblocks; ++bi) {
      const Block& b = im.blocks[static_cast<std::size_t>(bi)];
      BlockCache& cache = im.caches[static_cast<std::size_t>(bi)];
      const PointGroup& g = im.group(b);
      const std::size_t terms = b.term_end - b.term_begin;
      const auto m_pts = static_cast<Index>(terms * static_cast<std::size_t>(g.arity));
      cache.failed_term = std::numeric_limits<std::size_t>::max();
      fill_input(g.stencil, g.points, static_cast<Index>(b.term_begin) * g.arity, m_pts, cache.stack.input);
      forward_stack(im.net, g.stencil, cache.stack, m_pts);
      eval_head(g, s.outputs, cache.stack, m_pts, b.term_begin, terms, cache, tape);
    }
  }
  // Gather in term order; report the first non-finite term.
  const std::size_t w = static_cast<std::size_t>(s.residual.width);
  im.residual.components.assign(s.num_residual_terms() * w, 0.0);
  for (std::size_t g = 0; g < s.constraints.size(); ++g) {
    im.constraint_values[g].assign(s.constraints[g].num_terms() * static_cast<std::size_t>(s.constraints[g].width), 0.0);
  }
  for (std::size_t bi = 0; bi < im.blocks.size(); ++bi) {
    const Block& b = im.blocks[bi];
    const BlockCache& cache = im.caches[bi];
    const PointGroup& g = im.group(b);
    if (cache.failed_term != std::numeric_limits<std::size_t>::max()) {
      throw DivergedTraining("non-finite residual in group '" + g.name + "' at point " +
                                 std::to_string(cache.failed_term),
                             cache.failed_term);
    }
    auto& dst = b.group < 0 ? im.residual.components : im.constraint_values[static_cast<std::size_t>(b.group)];
    std::copy(cache.values.begin(), cache.values.end(),
              dst.begin() + static_cast<std::ptrdiff_t>(b.term_begin * static_cast<std::size_t>(g.width)));
  }
  im.residual.magnitude.resize(s.num_residual_terms());
  for (std::size_t k = 0; k < im.residual.magnitude.size(); ++k) {
    im.residual.magnitude[k] =
        residual_magnitude(std::span<const double>(im.residual.components.data() + k * w, w));
  }
  im.have_forward = true;
  return im.residual;
}

LossBreakdown LossEvaluator::loss(std::span<const double> lambda) const {
  const Impl& im = *impl_;
  if (!im.have_forward) throw InvalidArgument("loss requested before a forward pass");
  if (lambda.size() != im.spec.num_residual_terms()) {
    throw InvalidArgument("weights length must equal the number of residual points");
  }
  return combine_loss(im.spec, im.residual, im.constraint_values, lambda);
}

LossEvaluator::Result LossEvaluator::backward(std::span<const double> lambda, bool with_batches) {
  Impl& im = *impl_;
  const LossSpec& s = im.spec;
  Result result;
  result.loss = loss(lambda);
  const std::size_t p = im.net.num_params();
  const std::size_t n = s.num_residual_terms();
  const auto nblocks = static_cast<std::ptrdiff_t>(im.blocks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(im.opt))
  for (std::ptrdiff_t bi = 0; bi < nblocks; ++bi) {
    const Block& b = im.blocks[static_cast<std::size_t>(bi)];
    BlockCache& cache = im.caches[static_cast<std::size_t>(bi)];
    const PointGroup& g = im.group(b);
    const Stencil& st = g.stencil;
    const int C = st.size();
    const std::size_t terms = b.term_end - b.term_begin;
    const auto m_pts = static_cast<Index>(terms * static_cast<std::size_t>(g.arity));
    const auto width = static_cast<std::size_t>(g.width);
    const auto slots = static_cast<std::size_t>(g.arity * s.outputs * C);
    cache.ybar.setZero(s.outputs, C * m_pts);
    const double group_scale = b.group < 0 ? 0.0 : 2.0 / static_cast<double>(g.num_terms());
    for (std::size_t k = 0; k < terms; ++k) {
      for (std::size_t w = 0; w < width; ++w) {
        const double v = cache.values[k * width + w];
        double seed;
        if (b.group < 0) {
          const double l = lambda[b.term_begin + k];
          seed = 2.0 * l * l * v;
        } else {
          seed = group_scale * v;
        }
        if (seed == 0.0) continue;
        const double* J = cache.jac.data() + (k * width + w) * slots;
        for (int a = 0; a < g.arity; ++a) {
          const Index col = static_cast<Index>(k) * g.arity + a;
          for (int o = 0; o < s.outputs; ++o) {
            for (int c = 0; c < C; ++c) {
              cache.ybar(o, c * m_pts + col) += seed * J[(static_cast<std::size_t>(a * s.outputs + o)) * static_cast<std::size_t>(C) + static_cast<std::size_t>(c)];
            }
          }
        }
      }
    }
    cache.grad.assign(p, 0.0);
    backward_stack(im.net, st, cache.stack, m_pts, cache.ybar, cache.abar, cache.zbar, cache.grad);
  }

  // Fixed-order reduction: blocks within a batch, then batches, then constraints.
  std::vector<std::vector<double>> batch_sum(s.batches, std::vector<double>(p, 0.0));
  std::vector<double> constraint_sum(p, 0.0);
  for (std::size_t bi = 0; bi < im.blocks.size(); ++bi) {
    const Block& b = im.blocks[bi];
    auto& dst = b.group < 0 ? batch_sum[b.batch] : constraint_sum;
    const auto& src = im.caches[bi].grad;
    for (std::size_t i = 0; i < p; ++i) dst[i] += src[i];
  }
  std::vector<double> residual_sum(p, 0.0);
  for (const auto& bs : batch_sum)
    for (std::size_t i = 0; i < p; ++i) residual_sum[i] += bs[i];
  result.grad.values.resize(p);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < p; ++i) result.grad[i] = residual_sum[i] / nd + constraint_sum[i];
  if (with_batches) {
    const double md = static_cast<double>(s.batch_size());
    result.batch_grads.resize(s.batches);
    for (std::size_t b = 0; b < s.batches; ++b) {
      auto& gb = result.batch_grads[b].values;
      gb.resize(p);
      for (std::size_t i = 0; i < p; ++i) gb[i] = batch_sum[b][i] / md + constraint_sum[i];
    }
  }
  return result;
}

std::pair<LossBreakdown, ParamGradient> loss_and_param_grad(const nn::NetworkState& net,
                                                            const LossSpec& spec,
                                                            std::span<const double> lambda,
                                                            KernelOptions options) {
  LossEvaluator ev(spec, options);
  ev.forward(net);
  auto r = ev.backward(lambda, false);
  return {r.loss, std::move(r.grad)};
}

std::vector<ParamGradient> per_batch_grads(const nn::NetworkState& net, const LossSpec& spec,
                                           std::span<const double> lambda, KernelOptions options) {
  LossEvaluator ev(spec, options);
  ev.forward(net);
  return ev.backward(lambda, true).batch_grads;
}

namespace {

template <class Consumer>
void run_blocks(const nn::NetworkState& net, const Eigen::MatrixXd& points, const Stencil& st,
                const KernelOptions& options, Consumer&& consume) {
  if (points.rows() != net.input_dim()) throw ShapeError("point dimension does not match network input width");
  const Index n = points.cols();
  const auto bs = static_cast<Index>(std::max<std::size_t>(1, options.block_size));
  const Index nblocks = (n + bs - 1) / bs;
#pragma omp parallel num_threads(thread_count(options))
  {
    JetStack stack;
#pragma omp for schedule(dynamic, 1)
    for (Index bi = 0; bi < nblocks; ++bi) {
      const Index begin = bi * bs;
      const Index m = std::min(bs, n - begin);
      fill_input(st, points, begin, m, stack.input);
      forward_stack(net, st, stack, m);
      consume(begin, m, stack.output);
    }
  }
}

}  // namespace

Eigen::MatrixXd forward_values(const nn::NetworkState& net, const Eigen::MatrixXd& points,
                               KernelOptions options) {
  const Stencil st(net.input_dim(), {});
  Eigen::MatrixXd out(net.output_dim(), points.cols());
  run_blocks(net, points, st, options,
             [&](Index begin, Index m, const MatrixXd& y) { out.middleCols(begin, m) = y.leftCols(m); });
  return out;
}

std::vector<Jet> forward_stencil(const nn::NetworkState& net, const Eigen::MatrixXd& points,
                                 const Stencil& stencil, int channel, KernelOptions options) {
  if (channel < 0 || channel >= net.output_dim()) throw ShapeError("output channel out of range");
  if (stencil.dim() != net.input_dim()) throw ShapeError("stencil dimension does not match network input");
  std::vector<Jet> jets(static_cast<std::size_t>(points.cols()));
  const int C = stencil.size();
  run_blocks(net, points, stencil, options, [&](Index begin, Index m, const MatrixXd& y) {
    for (Index j = 0; j < m; ++j) {
      Jet jet(stencil.dim(), stencil.max_order());
      for (int c = 0; c < C; ++c) assign_component(jet, stencil.component(c), y(channel, c * m + j));
      jets[static_cast<std::size_t>(begin + j)] = jet;
    }
  });
  return jets;
}

}  // namespace pinnlab::ad
