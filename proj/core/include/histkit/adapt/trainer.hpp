#pragma once

#include <cstddef>
#include <vector>

#include "histkit/adapt/batching.hpp"
#include "histkit/adapt/model.hpp"
#include "histkit/embed/matrix.hpp"

namespace histkit::adapt {

// Source and target embeddings of the same pairs. Rows of tgt are matched
// to src by id, so the two may be stored in different orders.
struct PairedEmbeddings {
  embed::EmbeddingMatrix src;
  embed::EmbeddingMatrix tgt;
};

struct TrainResult {
  AdapterModel model;
  std::vector<double> loss_history;  // one entry per optimizer step
  std::vector<std::size_t> epoch_ends;  // exclusive step index at each epoch end

  std::vector<double> epoch_means() const;
};

// Adam (0.9, 0.999, 1e-8) from W = I, b = 0 over plan_batches. Contrastive
// scores adapter(src) against tgt (also adapted when cfg.symmetric);
// distill regresses adapter(src) onto tgt. Single-threaded and bit
// reproducible. A non-finite loss throws Error(kNumeric) with the step.
TrainResult train(const PairedEmbeddings& hist, const PairedEmbeddings& modern, const TrainConfig& cfg);

// Single-dataset form, strategy forced to hist.
TrainResult train(const embed::EmbeddingMatrix& src, const embed::EmbeddingMatrix& tgt, const TrainConfig& cfg);

// MSE(adapter(src), teacher) + MSE(adapter(tgt), teacher), so both sides
// land near the teacher. cfg.second_term = false drops the second term,
// which is train() with the distill objective and teacher as target. The
// objective in cfg is ignored.
TrainResult distill_bidirectional(const embed::EmbeddingMatrix& base_src, const embed::EmbeddingMatrix& base_tgt,
                                  const embed::EmbeddingMatrix& teacher_tgt, const TrainConfig& cfg);

}  // namespace histkit::adapt
