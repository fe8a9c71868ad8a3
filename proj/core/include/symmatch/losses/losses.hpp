#pragma once

#include <optional>
#include <string>

#include "symmatch/autodiff/ops.hpp"
#include "symmatch/geom/shape.hpp"

namespace symmatch::losses {

enum class Mode { nn_only, nn_plus_sym_nn, supervised_comm, unsupervised_comm };
enum class CommNorm { squared_frobenius, frobenius_eps };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

struct LossConfig {
  double tau = 0.3;
  // Commutativity weight; when unset, resolves to 1.0 for the supervised
  // setting and 0.2 for the unsupervised one.
  std::optional<double> gamma;
  Mode mode = Mode::supervised_comm;
  CommNorm comm_norm = CommNorm::squared_frobenius;

  double effective_gamma() const;
  bool needs_sym_maps() const {
    return mode == Mode::supervised_comm || mode == Mode::nn_plus_sym_nn;
  }
  bool needs_flips() const { return mode == Mode::unsupervised_comm; }
  void validate() const;
};

// Row-stochastic soft correspondence between two embeddings:
// S = row_softmax(phi_x phi_y^T / tau).
autodiff::Tensor soft_correspondence(const autodiff::Tensor& phi_x,
                                     const autodiff::Tensor& phi_y, double tau);

// Coordinate-transfer loss || S p_y - gt ||_F^2. p_y holds the sampled target
// coordinates, gt the full-resolution positions of the ground-truth images.
autodiff::Tensor nn_loss(const autodiff::Tensor& soft_map,
                         const autodiff::Tensor& target_coords,
                         const autodiff::Tensor& gt_coords);

// || T_x S - S T_y || with the symmetry maps applied as index gathers, never
// materialized as dense matrices. Norm selected by `norm`.
autodiff::Tensor comm_loss_supervised(const autodiff::Tensor& soft_map,
                                      const geom::PointMap& sym_x,
                                      const geom::PointMap& sym_y,
                                      CommNorm norm);

// || S_xfx S_xy - S_xy S_yyf || over three soft maps.
autodiff::Tensor comm_loss_unsupervised(const autodiff::Tensor& s_xfx,
                                        const autodiff::Tensor& s_xy,
                                        const autodiff::Tensor& s_yyf,
                                        CommNorm norm);

// Ingredients of one training pair, assembled per LossConfig::mode.
struct PairTerms {
  autodiff::Tensor nn;                          // always present
  std::optional<autodiff::Tensor> nn_sym_x;     // nn_plus_sym_nn
  std::optional<autodiff::Tensor> nn_sym_y;
  std::optional<autodiff::Tensor> comm;         // *_comm modes
};

struct TotalLoss {
  autodiff::Tensor total;
  double nn_value = 0.0;
  double comm_value = 0.0;  // includes the sym-NN terms in nn_plus_sym_nn
};

TotalLoss total_loss(const PairTerms& terms, const LossConfig& config);

}  // namespace symmatch::losses
