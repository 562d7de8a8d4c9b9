#include "slicesim/common.hpp"

#include <charconv>
#include <cmath>

namespace slicesim {

std::string to_string(SliceId id) {
  switch (id) {
    case SliceId::eMBB: return "eMBB";
    case SliceId::SocialMedia: return "SocialMedia";
    case SliceId::Browsing: return "Browsing";
  }
  throw std::invalid_argument("to_string: bad SliceId");
}

std::string to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "tanh";
}

std::string to_string(XaiMethod m) {
  switch (m) {
    case XaiMethod::IntegratedGradients: return "ig";
    case XaiMethod::InputXGradient: return "ixg";
    case XaiMethod::ShapSampling: return "shap";
  }
  throw std::invalid_argument("to_string: bad XaiMethod");
}

std::string to_string(RunMode m) {
  return m == RunMode::InHoc ? "in_hoc" : "post_hoc";
}

std::string to_string(SurrogateMode m) {
  return m == SurrogateMode::SmoothAnd ? "smooth_and" : "paper_literal";
}

SliceId slice_id_from_string(const std::string& s) {
  if (s == "eMBB" || s == "embb") return SliceId::eMBB;
  if (s == "SocialMedia" || s == "social_media") return SliceId::SocialMedia;
  if (s == "Browsing" || s == "browsing") return SliceId::Browsing;
  throw std::invalid_argument("unknown slice id: " + s);
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation: " + s);
}

XaiMethod xai_method_from_string(const std::string& s) {
  if (s == "ig") return XaiMethod::IntegratedGradients;
  if (s == "ixg") return XaiMethod::InputXGradient;
  if (s == "shap") return XaiMethod::ShapSampling;
  throw std::invalid_argument("unknown xai method: " + s);
}

RunMode run_mode_from_string(const std::string& s) {
  if (s == "in_hoc") return RunMode::InHoc;
  if (s == "post_hoc" || s == "post_hoc_baseline") return RunMode::PostHocBaseline;
  throw std::invalid_argument("unknown run mode: " + s);
}

SurrogateMode surrogate_mode_from_string(const std::string& s) {
  if (s == "smooth_and") return SurrogateMode::SmoothAnd;
  if (s == "paper_literal") return SurrogateMode::PaperLiteral;
  throw std::invalid_argument("unknown surrogate mode: " + s);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace slicesim
