#ifndef PSHAPLEY_ACTIVATION_HPP
#define PSHAPLEY_ACTIVATION_HPP

#include "pshapley/model.hpp"
#include "pshapley/types.hpp"

#include <cmath>
#include <string>

namespace pshapley {

// Calibrators applied to a validation point's true-class confidence.
struct Activation {
  enum class Kind { ReLU, Square, Mish, Swish };

  Kind kind = Kind::ReLU;
  double swish_beta = 1.0;  // Swish only; fixed per run, never fitted

  static Activation relu() { return {Kind::ReLU, 1.0}; }
  static Activation square() { return {Kind::Square, 1.0}; }
  static Activation mish() { return {Kind::Mish, 1.0}; }
  static Activation swish(double beta = 1.0) {
    require(beta > 0.0, "swish beta must be positive");
    return {Kind::Swish, beta};
  }

  // "relu", "square", "mish", "swish" or "swish@<beta>".
  std::string name() const;
  static Activation parse(const std::string& text);

  friend bool operator==(const Activation& a, const Activation& b) {
    return a.kind == b.kind && (a.kind != Kind::Swish || a.swish_beta == b.swish_beta);
  }
};

template <typename Scalar>
Scalar activation_eval(const Activation& af, Scalar x) {
  using std::tanh;
  switch (af.kind) {
    case Activation::Kind::ReLU:
      return x < Scalar(0) ? Scalar(0) : x;
    case Activation::Kind::Square:
      return x * x;
    case Activation::Kind::Mish:
      return x * tanh(softplus(x));
    case Activation::Kind::Swish:
      return x * sigmoid(Scalar(af.swish_beta) * x);
  }
  return x;
}

// First derivatives. Mish uses the closed form
//   omega * exp(x) / delta^2,
//   omega = 4(x+1) + 4e^{2x} + e^{3x} + (4x+6)e^x,  delta = 2e^x + e^{2x} + 2,
// and switches to tanh(sp) + x*sech^2(sp)*sigmoid(x) (sp = softplus) past
// x = 20, where e^{3x} would dominate the rounding. Swish uses
//   beta*f(x) + (1 - beta*f(x)) * sigmoid(beta*x).
// ReLU has no derivative at 0 and throws there.
template <typename Scalar>
Scalar activation_derivative(const Activation& af, Scalar x) {
  using std::exp;
  using std::tanh;
  switch (af.kind) {
    case Activation::Kind::ReLU:
      if (x == Scalar(0)) throw Error("domain", "ReLU derivative is undefined at 0");
      return x < Scalar(0) ? Scalar(0) : Scalar(1);
    case Activation::Kind::Square:
      return Scalar(2) * x;
    case Activation::Kind::Mish: {
      if (x > Scalar(20)) {
        const Scalar t = tanh(softplus(x));
        return t + x * (Scalar(1) - t * t) * sigmoid(x);
      }
      const Scalar e = exp(x);
      const Scalar e2 = e * e;
      const Scalar omega =
          Scalar(4) * (x + Scalar(1)) + Scalar(4) * e2 + e2 * e + (Scalar(4) * x + Scalar(6)) * e;
      const Scalar delta = Scalar(2) * e + e2 + Scalar(2);
      return omega * e / (delta * delta);
    }
    case Activation::Kind::Swish: {
      const Scalar beta(af.swish_beta);
      const Scalar f = x * sigmoid(beta * x);
      return beta * f + (Scalar(1) - beta * f) * sigmoid(beta * x);
    }
  }
  return Scalar(0);
}

}  // namespace pshapley

#endif  // PSHAPLEY_ACTIVATION_HPP
