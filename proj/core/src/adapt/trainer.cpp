#include "histkit/adapt/trainer.hpp"

#include <cmath>
#include <numeric>
#include <optional>

#include "histkit/adapt/losses.hpp"
#include "histkit/error.hpp"

namespace histkit::adapt {
namespace {

enum class Mode { kContrastive, kDistill, kBidirectional };

// Rows of one dataset in double precision, aligned by position.
struct Dataset {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<double> src;
  std::vector<double> tgt;
  std::vector<double> teacher;  // bidirectional only
};

std::vector<double> aligned_rows(const embed::EmbeddingMatrix& m, const std::vector<std::string>& ids) {
  std::vector<double> out;
  out.reserve(ids.size() * m.dim());
  for (const auto& id : ids) {
    const auto row = m.row(m.row_of(id));
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

void check_dims(const embed::EmbeddingMatrix& a, const embed::EmbeddingMatrix& b, std::string_view what) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                                                 " vs " + std::to_string(b.dim()) + ")");
  }
}

Dataset make_dataset(const embed::EmbeddingMatrix& src, const embed::EmbeddingMatrix& tgt,
                     const embed::EmbeddingMatrix* teacher) {
  check_dims(src, tgt, "train");
  if (src.size() != tgt.size()) {
    throw Error(ErrorCode::kInvalidArgument, "train: " + std::to_string(src.size()) + " source rows vs " +
                                                 std::to_string(tgt.size()) + " target rows");
  }
  Dataset d;
  d.ids = src.ids();
  d.dim = src.dim();
  d.src.assign(src.data().begin(), src.data().end());
  d.tgt = aligned_rows(tgt, d.ids);
  if (teacher) {
    check_dims(src, *teacher, "train");
    d.teacher = aligned_rows(*teacher, d.ids);
  }
  return d;
}

class Adam {
 public:
  explicit Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& theta, const std::vector<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * grad[k];
      v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * grad[k] * grad[k];
      theta[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  long long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// out_i = W x_i + b for the listed rows of `data`.
Rows forward(const std::vector<double>& theta, std::size_t dim, const std::vector<double>& data,
             const std::vector<std::size_t>& rows) {
  Rows out(rows.size(), dim);
  const double* b = theta.data() + dim * dim;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* x = data.data() + rows[i] * dim;
    auto o = out.row(i);
    for (std::size_t r = 0; r < dim; ++r) {
      const double* w = theta.data() + r * dim;
      double acc = b[r];
      for (std::size_t c = 0; c < dim; ++c) acc += w[c] * x[c];
      o[r] = acc;
    }
  }
  return out;
}

Rows gather(std::size_t dim, const std::vector<double>& data, const std::vector<std::size_t>& rows) {
  Rows out(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(data.data() + rows[i] * dim, dim, out.row(i).begin());
  }
  return out;
}

// Accumulates dL/dW += g_i x_i^T and dL/db += g_i.
void backward(std::vector<double>& grad, std::size_t dim, const Rows& g, const std::vector<double>& data,
              const std::vector<std::size_t>& rows) {
  double* gb = grad.data() + dim * dim;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* x = data.data() + rows[i] * dim;
    const auto gi = g.row(i);
    for (std::size_t r = 0; r < dim; ++r) {
      double* gw = grad.data() + r * dim;
      for (std::size_t c = 0; c < dim; ++c) gw[c] += gi[r] * x[c];
      gb[r] += gi[r];
    }
  }
}

TrainResult run(const Dataset& hist, const Dataset& modern, const TrainConfig& cfg, Mode mode) {
  cfg.validate();
  const std::size_t dim = hist.dim;
  const std::size_t n_params = dim * dim + dim;
  AdapterModel model = AdapterModel::identity(dim);
  std::vector<double> theta(model.W);
  theta.insert(theta.end(), model.b.begin(), model.b.end());
  Adam adam(n_params, cfg.learning_rate);

  TrainResult result;
  std::vector<double> grad(n_params);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.effective_epochs(); ++epoch) {
    const auto plan = plan_batches(hist.ids, modern.ids, cfg, epoch);
    for (const auto& batch : plan.batches) {
      // Rows of a mixed batch come from two datasets; copy them into one
      // batch-local dataset so the kernels see contiguous rows.
      Dataset local;
      local.dim = dim;
      std::vector<std::size_t> rows(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const Dataset& d = batch[i].source == Source::kHist ? hist : modern;
        const std::size_t off = batch[i].index * dim;
        local.src.insert(local.src.end(), d.src.begin() + off, d.src.begin() + off + dim);
        local.tgt.insert(local.tgt.end(), d.tgt.begin() + off, d.tgt.begin() + off + dim);
        if (mode == Mode::kBidirectional) {
          local.teacher.insert(local.teacher.end(), d.teacher.begin() + off, d.teacher.begin() + off + dim);
        }
        rows[i] = i;
      }

      std::fill(grad.begin(), grad.end(), 0.0);
      const Rows a = forward(theta, dim, local.src, rows);
      double loss = 0.0;
      try {
        switch (mode) {
          case Mode::kContrastive: {
            const Rows b = cfg.symmetric ? forward(theta, dim, local.tgt, rows) : gather(dim, local.tgt, rows);
            const auto res = mnrl_loss(a, b, cfg.scale, cfg.symmetric);
            loss = res.loss;
            backward(grad, dim, res.grad_a, local.src, rows);
            if (cfg.symmetric) backward(grad, dim, res.grad_b, local.tgt, rows);
            break;
          }
          case Mode::kDistill: {
            const auto res = distill_loss(a, gather(dim, local.tgt, rows));
            loss = res.loss;
            backward(grad, dim, res.grad_a, local.src, rows);
            break;
          }
          case Mode::kBidirectional: {
            const Rows teacher = gather(dim, local.teacher, rows);
            const auto first = distill_loss(a, teacher);
            loss = first.loss;
            backward(grad, dim, first.grad_a, local.src, rows);
            if (cfg.second_term) {
              const auto second = distill_loss(forward(theta, dim, local.tgt, rows), teacher);
              loss += second.loss;
              backward(grad, dim, second.grad_a, local.tgt, rows);
            }
            break;
          }
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNumeric) throw;
        throw Error(ErrorCode::kNumeric, std::string(e.what()) + " at step " + std::to_string(step) + " (epoch " +
                                             std::to_string(epoch) + ")");
      }
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::kNumeric, "non-finite loss at step " + std::to_string(step) + " (epoch " +
                                             std::to_string(epoch) + ")");
      }
      result.loss_history.push_back(loss);
      adam.step(theta, grad);
      ++step;
    }
    result.epoch_ends.push_back(step);
  }

  model.W.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(dim * dim));
  model.b.assign(theta.begin() + static_cast<std::ptrdiff_t>(dim * dim), theta.end());
  model.objective = mode == Mode::kContrastive ? Objective::kContrastive : Objective::kDistill;
  model.strategy = cfg.strategy;
  model.hist_pairs = cfg.strategy == Strategy::kModern ? 0 : hist.ids.size();
  model.modern_pairs = cfg.strategy == Strategy::kHist ? 0 : modern.ids.size();
  model.seed = cfg.seed;
  model.scale = cfg.scale;
  model.learning_rate = cfg.learning_rate;
  model.epochs = cfg.effective_epochs();
  model.batch_size = cfg.batch_size;
  const bool both = (mode == Mode::kContrastive && cfg.symmetric) || (mode == Mode::kBidirectional && cfg.second_term);
  model.apply_to = both ? ApplyTo::kBoth : ApplyTo::kSource;
  result.model = std::move(model);
  return result;
}

Mode mode_of(Objective o) { return o == Objective::kContrastive ? Mode::kContrastive : Mode::kDistill; }

}  // namespace

std::vector<double> TrainResult::epoch_means() const {
  std::vector<double> out;
  std::size_t begin = 0;
  for (std::size_t end : epoch_ends) {
    const double sum = std::accumulate(loss_history.begin() + static_cast<std::ptrdiff_t>(begin),
                                       loss_history.begin() + static_cast<std::ptrdiff_t>(end), 0.0);
    out.push_back(end > begin ? sum / static_cast<double>(end - begin) : 0.0);
    begin = end;
  }
  return out;
}

TrainResult train(const PairedEmbeddings& hist, const PairedEmbeddings& modern, const TrainConfig& cfg) {
  const bool use_hist = cfg.strategy != Strategy::kModern;
  const bool use_modern = cfg.strategy != Strategy::kHist;
  Dataset h = use_hist ? make_dataset(hist.src, hist.tgt, nullptr) : Dataset{};
  Dataset m = use_modern ? make_dataset(modern.src, modern.tgt, nullptr) : Dataset{};
  if (use_hist && use_modern && h.dim != m.dim) {
    throw Error(ErrorCode::kInvalidArgument, "train: hist dim " + std::to_string(h.dim) + " vs modern dim " +
                                                 std::to_string(m.dim));
  }
  if (!use_hist) h.dim = m.dim;
  return run(h, m, cfg, mode_of(cfg.objective));
}

TrainResult train(const embed::EmbeddingMatrix& src, const embed::EmbeddingMatrix& tgt, const TrainConfig& cfg) {
  TrainConfig c = cfg;
  c.strategy = Strategy::kHist;
  return run(make_dataset(src, tgt, nullptr), Dataset{}, c, mode_of(c.objective));
}

TrainResult distill_bidirectional(const embed::EmbeddingMatrix& base_src, const embed::EmbeddingMatrix& base_tgt,
                                  const embed::EmbeddingMatrix& teacher_tgt, const TrainConfig& cfg) {
  TrainConfig c = cfg;
  c.strategy = Strategy::kHist;
  c.objective = Objective::kDistill;
  return run(make_dataset(base_src, base_tgt, &teacher_tgt), Dataset{}, c, Mode::kBidirectional);
}

}  // namespace histkit::adapt
