#include "helm/angles.hpp"

namespace helm {

double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, kTwoPi);
  if (wrapped <= -kPi) wrapped += kTwoPi;
  return wrapped;
}

}  // namespace helm
