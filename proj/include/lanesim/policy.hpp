#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <string>

#include "lanesim/labels.hpp"
#include "lanesim/patches.hpp"
#include "lanesim/polyline.hpp"
#include "lanesim/store.hpp"

namespace lanesim {

// Lateral offsets y (m, left positive) at stations x = 1..100 m ahead in the
// vehicle frame. Values are finite and within the +-20 m sanity bound.
using TrajectoryPrediction = std::vector<double>;

constexpr double kPredictionBoundM = 20.0;

// Ground-truth channels only the privileged reference policies may read.
struct PrivilegedView {
  Pose2 pose;
  const ArcPolyline* centerline = nullptr;
  const ArcPolyline* human_path = nullptr;
};

struct PolicyInput {
  const ImageBuffer* patch = nullptr;
  const PrivilegedView* privileged = nullptr;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual TrajectoryPrediction run(const PolicyInput& input) const = 0;
  virtual std::string name() const = 0;
  // Privileged policies skip sensor synthesis entirely.
  virtual bool needs_patch() const { return true; }
};

// Deployable policies: run() strips everything but the patch before the
// derived class sees the input, so they cannot read simulator state.
class PatchPolicy : public Policy {
 public:
  TrajectoryPrediction run(const PolicyInput& input) const final;

 protected:
  virtual TrajectoryPrediction predict_patch(const ImageBuffer& patch) const = 0;
};

// Tracks the true lane center; the upper-bound reference.
class OraclePolicy : public Policy {
 public:
  TrajectoryPrediction run(const PolicyInput& input) const override;
  std::string name() const override { return "oracle"; }
  bool needs_patch() const override { return false; }
};

// Reproduces the recorded human path exactly: a stand-in for a model that
// perfectly decodes viewpoint-warp artifacts.
class CheaterPolicy : public Policy {
 public:
  TrajectoryPrediction run(const PolicyInput& input) const override;
  std::string name() const override { return "cheater"; }
  bool needs_patch() const override { return false; }
};

// Linear patch-to-trajectory map. weights is (features+1) x 100 with the bias
// in the last row; prediction = weights^T [pixels; 1], clamped to the sanity
// bound.
struct RidgeModel {
  Eigen::MatrixXd weights;
  double lambda = 0;
  PatchSpec patch;

  size_t feature_dim() const { return static_cast<size_t>(weights.rows()) - 1; }
  TrajectoryPrediction predict(const ImageBuffer& patch_img) const;

  // Model file: magic "PNRM" | version u32 | rows u32 | cols u32 | lambda f64
  // | patch kind u32 | out_w u32 | out_h u32 | channels u32 | ratio_w f64 |
  // ratio_h f64 | roi hfov f64 | roi ground_width f64 | row-major f64
  // weights, little-endian.
  void save(const std::filesystem::path& path) const;
  static RidgeModel load(const std::filesystem::path& path);
};

// Solves (X^T X + lambda*I') W = X^T Y over the whole store in one streaming
// pass (batched Gram accumulation); I' leaves the intercept unregularized so
// the large-lambda limit predicts the mean label. Throws when the system is
// effectively singular (lambda = 0 with degenerate data).
RidgeModel train_ridge(StoreReader& store, double lambda, const PatchSpec& patch_spec);

class RidgePolicy : public PatchPolicy {
 public:
  explicit RidgePolicy(RidgeModel model) : model_(std::move(model)) {}
  std::string name() const override { return "ridge"; }
  const RidgeModel& model() const { return model_; }

 protected:
  TrajectoryPrediction predict_patch(const ImageBuffer& patch) const override {
    return model_.predict(patch);
  }

 private:
  RidgeModel model_;
};

// Parses "oracle", "cheater", or "model:<path>".
std::unique_ptr<Policy> make_policy(const std::string& spec);

}  // namespace lanesim
