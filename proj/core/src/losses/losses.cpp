#include "symmatch/losses/losses.hpp"

#include <stdexcept>

namespace symmatch::losses {

namespace ad = autodiff;

Mode mode_from_string(const std::string& s) {
  if (s == "nn_only") return Mode::nn_only;
  if (s == "nn_plus_sym_nn") return Mode::nn_plus_sym_nn;
  if (s == "supervised_comm") return Mode::supervised_comm;
  if (s == "unsupervised_comm") return Mode::unsupervised_comm;
  throw std::runtime_error("unknown loss mode '" + s + "'");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::nn_only: return "nn_only";
    case Mode::nn_plus_sym_nn: return "nn_plus_sym_nn";
    case Mode::supervised_comm: return "supervised_comm";
    case Mode::unsupervised_comm: return "unsupervised_comm";
  }
  return "?";
}

double LossConfig::effective_gamma() const {
  if (gamma) return *gamma;
  return mode == Mode::unsupervised_comm ? 0.2 : 1.0;
}

void LossConfig::validate() const {
  if (!(tau > 0.0)) throw std::runtime_error("loss: tau must be positive");
  if (gamma && *gamma < 0.0) throw std::runtime_error("loss: gamma must be >= 0");
}

ad::Tensor soft_correspondence(const ad::Tensor& phi_x, const ad::Tensor& phi_y,
                               double tau) {
  if (phi_x.cols() != phi_y.cols())
    throw std::runtime_error("soft_correspondence: embedding dimensions differ (" +
                             std::to_string(phi_x.cols()) + " vs " +
                             std::to_string(phi_y.cols()) + ")");
  return row_softmax(matmul(phi_x, transpose(phi_y)), tau);
}

ad::Tensor nn_loss(const ad::Tensor& soft_map, const ad::Tensor& target_coords,
                   const ad::Tensor& gt_coords) {
  if (soft_map.cols() != target_coords.rows() ||
      soft_map.rows() != gt_coords.rows() ||
      target_coords.cols() != gt_coords.cols())
    throw std::runtime_error("nn_loss: shape mismatch");
  return frobenius_sq(sub(matmul(soft_map, target_coords), gt_coords));
}

namespace {

ad::Tensor finish_comm(const ad::Tensor& diff, CommNorm norm) {
  ad::Tensor sq = frobenius_sq(diff);
  if (norm == CommNorm::squared_frobenius) return sq;
  return sqrt_eps(sq, 1e-12);
}

}  // namespace

ad::Tensor comm_loss_supervised(const ad::Tensor& soft_map,
                                const geom::PointMap& sym_x,
                                const geom::PointMap& sym_y, CommNorm norm) {
  if (sym_x.source_size != soft_map.rows() || sym_y.source_size != soft_map.cols())
    throw std::runtime_error("comm_loss_supervised: symmetry map sizes (" +
                             std::to_string(sym_x.source_size) + ", " +
                             std::to_string(sym_y.source_size) +
                             ") do not match the soft map (" +
                             std::to_string(soft_map.rows()) + "x" +
                             std::to_string(soft_map.cols()) + ")");
  ad::Tensor left = gather_rows(soft_map, sym_x.targets);
  ad::Tensor right = scatter_cols(soft_map, sym_y.targets);
  return finish_comm(sub(left, right), norm);
}

ad::Tensor comm_loss_unsupervised(const ad::Tensor& s_xfx, const ad::Tensor& s_xy,
                                  const ad::Tensor& s_yyf, CommNorm norm) {
  if (s_xfx.cols() != s_xy.rows() || s_xy.cols() != s_yyf.rows() ||
      s_xfx.rows() != s_xy.rows() || s_yyf.cols() != s_xy.cols())
    throw std::runtime_error("comm_loss_unsupervised: shapes do not conform");
  ad::Tensor left = matmul(s_xfx, s_xy);
  ad::Tensor right = matmul(s_xy, s_yyf);
  return finish_comm(sub(left, right), norm);
}

TotalLoss total_loss(const PairTerms& terms, const LossConfig& config) {
  config.validate();
  TotalLoss out{terms.nn, terms.nn.scalar(), 0.0};
  switch (config.mode) {
    case Mode::nn_only:
      break;
    case Mode::nn_plus_sym_nn: {
      if (!terms.nn_sym_x || !terms.nn_sym_y)
        throw std::runtime_error(
            "total_loss: nn_plus_sym_nn needs symmetry transfer terms");
      ad::Tensor sym = add(*terms.nn_sym_x, *terms.nn_sym_y);
      out.comm_value = sym.scalar();
      out.total = add(terms.nn, sym);
      break;
    }
    case Mode::supervised_comm:
    case Mode::unsupervised_comm: {
      if (!terms.comm)
        throw std::runtime_error("total_loss: commutativity term missing for " +
                                 to_string(config.mode));
      double g = config.effective_gamma();
      out.comm_value = terms.comm->scalar();
      out.total = add(terms.nn, scale(*terms.comm, g));
      break;
    }
  }
  return out;
}

}  // namespace symmatch::losses
