#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace slicesim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Input dimensionality: 3 OTT traffic columns + CQI + MIMO full-rank usage.
inline constexpr int kFeatureCount = 5;

inline constexpr const char* kFeatureNames[kFeatureCount] = {
    "ott1", "ott2", "ott3", "cqi", "mimo"};

/// Thrown when tensor/vector dimensions do not line up.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation produces non-finite intermediates.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SliceId { eMBB = 0, SocialMedia = 1, Browsing = 2 };
enum class Activation { Relu, Tanh };
enum class XaiMethod { IntegratedGradients, InputXGradient, ShapSampling };
enum class RunMode { InHoc, PostHocBaseline };
enum class SurrogateMode { SmoothAnd, PaperLiteral };

std::string to_string(SliceId id);
std::string to_string(Activation a);
std::string to_string(XaiMethod m);
std::string to_string(RunMode m);
std::string to_string(SurrogateMode m);

SliceId slice_id_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);
XaiMethod xai_method_from_string(const std::string& s);
RunMode run_mode_from_string(const std::string& s);
SurrogateMode surrogate_mode_from_string(const std::string& s);

/// Shortest round-trip decimal rendering of a double (locale-independent).
/// Used everywhere a float enters a CSV or JSON artifact so that emitted
/// files are byte-stable across runs.
std::string format_double(double v);

}  // namespace slicesim
