#include "symmatch/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>

#include "symmatch/losses/losses.hpp"

namespace symmatch::train {

namespace ad = autodiff;

Trainer::Trainer(DatasetIndex index, TrainConfig config)
    : index_(std::move(index)),
      config_(std::move(config)),
      params_(model::init(config_.arch, config_.seed)),
      adam_(AdamState::init(params_)),
      rng_(config_.seed) {
  config_.validate();
  index_.validate_for(config_.loss, config_.sample_count);
  tape_.check_finite = false;  // trainer checks losses itself
}

int Trainer::steps_per_epoch() const {
  int pairs = static_cast<int>(index_.pairs.size());
  return (pairs + config_.batch_pairs - 1) / config_.batch_pairs;
}

std::vector<int> Trainer::next_chunk() {
  if (epoch_pos_ >= epoch_order_.size()) {
    // New epoch: reshuffle the pair order.
    epoch_order_.resize(index_.pairs.size());
    for (size_t i = 0; i < epoch_order_.size(); ++i)
      epoch_order_[i] = static_cast<int>(i);
    for (size_t i = 0; i + 1 < epoch_order_.size(); ++i) {
      size_t j = i + rng_.bounded(epoch_order_.size() - i);
      std::swap(epoch_order_[i], epoch_order_[j]);
    }
    epoch_pos_ = 0;
  }
  size_t end = std::min(epoch_pos_ + static_cast<size_t>(config_.batch_pairs),
                        epoch_order_.size());
  std::vector<int> chunk(epoch_order_.begin() + epoch_pos_,
                         epoch_order_.begin() + end);
  epoch_pos_ = end;
  return chunk;
}

namespace {

ad::Tensor constant_points(ad::Tape& tape, const geom::Points& p) {
  const int n = static_cast<int>(p.rows());
  std::vector<double> data(static_cast<size_t>(n) * 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) data[static_cast<size_t>(i) * 3 + c] = p(i, c);
  return tape.constant(n, 3, data);
}

geom::Points gather_positions(const geom::Points& p, const std::vector<int>& idx) {
  geom::Points out(static_cast<long>(idx.size()), 3);
  for (size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<long>(i)) = p.row(idx[i]);
  return out;
}

}  // namespace

StepMetrics Trainer::step() {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<int> chunk = next_chunk();
  std::vector<PairBatchItem> batch = make_batch(index_, config_, chunk, rng_);

  tape_.clear();
  model::StagedParams staged = model::stage(tape_, params_);

  const losses::LossConfig& loss_cfg = config_.loss;
  std::optional<ad::Tensor> batch_sum;
  double nn_sum = 0.0, comm_sum = 0.0;
  for (const PairBatchItem& item : batch) {
    ad::Tensor phi_x = model::embed(tape_, staged, item.x.positions);
    ad::Tensor phi_y = model::embed(tape_, staged, item.y.positions);
    ad::Tensor s_xy = losses::soft_correspondence(phi_x, phi_y, loss_cfg.tau);

    losses::PairTerms terms{
        losses::nn_loss(s_xy, constant_points(tape_, item.y.positions),
                        constant_points(tape_, item.gt_targets)),
        std::nullopt, std::nullopt, std::nullopt};

    switch (loss_cfg.mode) {
      case losses::Mode::nn_only:
        break;
      case losses::Mode::nn_plus_sym_nn: {
        // Transfer term that pushes the soft self-map toward the ground
        // truth symmetry on each shape.
        ad::Tensor s_xx = losses::soft_correspondence(phi_x, phi_x, loss_cfg.tau);
        ad::Tensor s_yy = losses::soft_correspondence(phi_y, phi_y, loss_cfg.tau);
        geom::Points sym_targets_x =
            gather_positions(item.x.positions, item.sym_x->targets);
        geom::Points sym_targets_y =
            gather_positions(item.y.positions, item.sym_y->targets);
        terms.nn_sym_x =
            losses::nn_loss(s_xx, constant_points(tape_, item.x.positions),
                            constant_points(tape_, sym_targets_x));
        terms.nn_sym_y =
            losses::nn_loss(s_yy, constant_points(tape_, item.y.positions),
                            constant_points(tape_, sym_targets_y));
        break;
      }
      case losses::Mode::supervised_comm:
        terms.comm = losses::comm_loss_supervised(s_xy, *item.sym_x, *item.sym_y,
                                                  loss_cfg.comm_norm);
        break;
      case losses::Mode::unsupervised_comm: {
        ad::Tensor phi_xf = model::embed(tape_, staged, item.x_flip->positions);
        ad::Tensor phi_yf = model::embed(tape_, staged, item.y_flip->positions);
        ad::Tensor s_xfx = losses::soft_correspondence(phi_xf, phi_x, loss_cfg.tau);
        ad::Tensor s_yyf = losses::soft_correspondence(phi_y, phi_yf, loss_cfg.tau);
        terms.comm = losses::comm_loss_unsupervised(s_xfx, s_xy, s_yyf,
                                                    loss_cfg.comm_norm);
        break;
      }
    }

    losses::TotalLoss pair_loss = losses::total_loss(terms, loss_cfg);
    nn_sum += pair_loss.nn_value;
    comm_sum += pair_loss.comm_value;
    batch_sum = batch_sum ? ad::add(*batch_sum, pair_loss.total) : pair_loss.total;
  }

  // Batch loss is the mean over pairs.
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  ad::Tensor total = ad::scale(*batch_sum, inv_b);
  double total_value = total.scalar();
  if (!std::isfinite(total_value))
    throw std::runtime_error("training diverged: non-finite loss at step " +
                             std::to_string(step_count_ + 1));
  tape_.backward(total);

  std::vector<std::vector<double>> grads;
  grads.reserve(staged.leaves.size());
  for (const ad::Tensor& leaf : staged.leaves) grads.push_back(leaf.grad());
  adam_step(params_, grads, adam_, config_);

  ++step_count_;
  auto t1 = std::chrono::steady_clock::now();
  StepMetrics m;
  m.step = step_count_;
  m.l_nn = nn_sum * inv_b;
  m.l_comm = comm_sum * inv_b;
  m.l_total = total_value;
  m.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return m;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<StepMetrics>& metrics) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write metrics " + path);
  std::fprintf(f, "step,L_NN,L_comm,L_total,wall_ms\n");
  for (const StepMetrics& m : metrics)
    std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%.3f\n",
                 static_cast<long long>(m.step), m.l_nn, m.l_comm, m.l_total,
                 m.wall_ms);
  std::fclose(f);
}

TrainResult train(DatasetIndex index, const TrainConfig& config,
                  const std::string& checkpoint_path) {
  Trainer trainer(std::move(index), config);
  TrainResult result;
  result.checkpoint_path = checkpoint_path;
  result.metrics_path = config.metrics_path.empty()
                            ? checkpoint_path + ".metrics.csv"
                            : config.metrics_path;
  const int64_t total_steps =
      static_cast<int64_t>(config.epochs) * trainer.steps_per_epoch();
  for (int64_t s = 0; s < total_steps; ++s) {
    result.metrics.push_back(trainer.step());
    if (config.checkpoint_every > 0 && (s + 1) % config.checkpoint_every == 0 &&
        s + 1 < total_steps) {
      model::save_checkpoint(checkpoint_path + ".step" + std::to_string(s + 1),
                             trainer.params());
    }
  }
  model::save_checkpoint(checkpoint_path, trainer.params());
  save_adam_state(checkpoint_path + ".opt", trainer.optimizer_state());
  write_metrics_csv(result.metrics_path, result.metrics);
  return result;
}

}  // namespace symmatch::train
