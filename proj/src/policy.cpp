#include "lanesim/policy.hpp"

#include <cstring>
#include <fstream>

namespace lanesim {
namespace {

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

TrajectoryPrediction path_prediction(const ArcPolyline& path, const Pose2& pose,
                                     const char* what) {
  TrajectoryLabel label;
  try {
    label = extract_local_trajectory(path, pose);
  } catch (const RuntimeError& e) {
    throw RuntimeError(std::string(what) + ": " + e.what());
  }
  TrajectoryPrediction pred(kLabelPointCount);
  for (size_t i = 0; i < kLabelPointCount; ++i) pred[i] = label.points[i].y();
  return pred;
}

}  // namespace

TrajectoryPrediction PatchPolicy::run(const PolicyInput& input) const {
  if (input.patch == nullptr) throw RuntimeError("patch policy: no patch in input");
  return predict_patch(*input.patch);
}

TrajectoryPrediction OraclePolicy::run(const PolicyInput& input) const {
  if (input.privileged == nullptr || input.privileged->centerline == nullptr)
    throw RuntimeError("oracle policy requires the privileged centerline");
  return path_prediction(*input.privileged->centerline, input.privileged->pose, "oracle policy");
}

TrajectoryPrediction CheaterPolicy::run(const PolicyInput& input) const {
  if (input.privileged == nullptr || input.privileged->human_path == nullptr)
    throw RuntimeError("cheater policy requires the privileged human path");
  return path_prediction(*input.privileged->human_path, input.privileged->pose, "cheater policy");
}

TrajectoryPrediction RidgeModel::predict(const ImageBuffer& patch_img) const {
  const size_t d = feature_dim();
  if (patch_img.size() != d)
    throw RuntimeError("ridge predict: patch size does not match the model");
  Eigen::VectorXd z(d + 1);
  for (size_t i = 0; i < d; ++i) z[i] = patch_img.data()[i];
  z[d] = 1.0;
  const Eigen::VectorXd y = weights.transpose() * z;
  TrajectoryPrediction pred(static_cast<size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw RuntimeError("ridge predict: non-finite output");
    pred[static_cast<size_t>(i)] = std::clamp(y[i], -kPredictionBoundM, kPredictionBoundM);
  }
  return pred;
}

void RidgeModel::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw RuntimeError("model save: cannot open " + path.string());
  os.write("PNRM", 4);
  put_u32(os, 1);
  put_u32(os, static_cast<uint32_t>(weights.rows()));
  put_u32(os, static_cast<uint32_t>(weights.cols()));
  put_f64(os, lambda);
  put_u32(os, static_cast<uint32_t>(patch.kind));
  put_u32(os, static_cast<uint32_t>(patch.out_w));
  put_u32(os, static_cast<uint32_t>(patch.out_h));
  put_u32(os, static_cast<uint32_t>(patch.channels_hint));
  put_f64(os, patch.ratio_w);
  put_f64(os, patch.ratio_h);
  put_f64(os, patch.roi.hfov_rad);
  put_f64(os, patch.roi.ground_width_m);
  for (Eigen::Index r = 0; r < weights.rows(); ++r)
    for (Eigen::Index c = 0; c < weights.cols(); ++c) put_f64(os, weights(r, c));
  os.close();
  if (!os) throw RuntimeError("model save: write failed for " + path.string());
}

RidgeModel RidgeModel::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw RuntimeError("model load: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PNRM", 4) != 0)
    throw RuntimeError("model load: bad magic in " + path.string());
  if (get_u32(is) != 1) throw RuntimeError("model load: unsupported version");
  RidgeModel m;
  const uint32_t rows = get_u32(is);
  const uint32_t cols = get_u32(is);
  m.lambda = get_f64(is);
  const uint32_t kind = get_u32(is);
  if (kind > 1) throw RuntimeError("model load: unknown patch kind");
  m.patch.kind = static_cast<PatchSpec::Kind>(kind);
  m.patch.out_w = static_cast<int>(get_u32(is));
  m.patch.out_h = static_cast<int>(get_u32(is));
  m.patch.channels_hint = static_cast<int>(get_u32(is));
  m.patch.ratio_w = get_f64(is);
  m.patch.ratio_h = get_f64(is);
  m.patch.roi.hfov_rad = get_f64(is);
  m.patch.roi.ground_width_m = get_f64(is);
  if (rows == 0 || cols == 0 || rows != m.patch.feature_count() + 1)
    throw RuntimeError("model load: dimensions inconsistent with the patch kind");
  m.weights.resize(rows, cols);
  for (uint32_t r = 0; r < rows; ++r)
    for (uint32_t c = 0; c < cols; ++c) m.weights(r, c) = get_f64(is);
  if (!is) throw RuntimeError("model load: truncated file");
  // No trailing bytes allowed.
  is.get();
  if (!is.eof()) throw RuntimeError("model load: trailing bytes in " + path.string());
  return m;
}

RidgeModel train_ridge(StoreReader& store, double lambda, const PatchSpec& patch_spec) {
  const StoreHeader& h = store.header();
  if (h.record_count == 0) throw ConfigError("train_ridge: empty store");
  if (lambda < 0) throw ConfigError("train_ridge: lambda must be >= 0");
  const size_t d = static_cast<size_t>(h.patch_w) * h.patch_h * h.patch_c;
  if (patch_spec.feature_count() != d)
    throw ConfigError("train_ridge: patch spec does not match the store dimensions");
  const size_t n_out = kLabelPointCount;

  const Eigen::Index dim = static_cast<Eigen::Index>(d) + 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd xty = Eigen::MatrixXd::Zero(dim, n_out);

  // Batched accumulation keeps the rank update in matrix-matrix form without
  // changing the summation order between runs.
  constexpr Eigen::Index kBatch = 256;
  Eigen::MatrixXd xb(kBatch, dim);
  Eigen::MatrixXd yb(kBatch, n_out);
  Eigen::Index fill = 0;
  const auto flush = [&]() {
    if (fill == 0) return;
    const auto xv = xb.topRows(fill);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xv.transpose());
    xty.noalias() += xv.transpose() * yb.topRows(fill);
    fill = 0;
  };

  store.rewind();
  SampleRecord rec;
  while (store.next(&rec)) {
    for (size_t i = 0; i < d; ++i) xb(fill, static_cast<Eigen::Index>(i)) = rec.patch[i];
    xb(fill, dim - 1) = 1.0;
    if (h.label_kind == LabelKind::y_only) {
      for (size_t i = 0; i < n_out; ++i) yb(fill, static_cast<Eigen::Index>(i)) = rec.label[i];
    } else {
      for (size_t i = 0; i < n_out; ++i)
        yb(fill, static_cast<Eigen::Index>(i)) = rec.label[3 * i + 1];
    }
    if (++fill == kBatch) flush();
  }
  flush();
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

  Eigen::MatrixXd lhs = gram;
  // Pixel weights are regularized; the intercept is not, so the large-lambda
  // limit degrades to the mean label instead of zero.
  for (Eigen::Index i = 0; i + 1 < dim; ++i) lhs(i, i) += lambda;

  RidgeModel model;
  model.lambda = lambda;
  model.patch = patch_spec;
  model.weights = lhs.ldlt().solve(xty);

  const double resid = (lhs * model.weights - xty).cwiseAbs().maxCoeff();
  const double scale =
      std::max(1.0, std::max(xty.cwiseAbs().maxCoeff(),
                             lhs.cwiseAbs().maxCoeff() * model.weights.cwiseAbs().maxCoeff()));
  if (!(resid < 1e-6 * scale))
    throw RuntimeError("train_ridge: normal equations not solvable (singular system)");
  return model;
}

std::unique_ptr<Policy> make_policy(const std::string& spec) {
  if (spec == "oracle") return std::make_unique<OraclePolicy>();
  if (spec == "cheater") return std::make_unique<CheaterPolicy>();
  if (spec.rfind("model:", 0) == 0)
    return std::make_unique<RidgePolicy>(RidgeModel::load(spec.substr(6)));
  throw ConfigError("unknown policy '" + spec + "' (expected oracle, cheater, or model:<file>)");
}

}  // namespace lanesim
