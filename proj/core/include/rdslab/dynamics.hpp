#pragma once
// Torus diffeomorphisms (integer-linear part plus trigonometric
// perturbation), exact jets, Newton inverses, words and finitely supported
// driving measures, and the named-constants record with its validity checks.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rdslab/rng.hpp"
#include "rdslab/torus.hpp"

namespace rdslab {

struct FourierMode {
  int kx = 0, ky = 0;     // integer frequency
  Vec2 a;                 // amplitude vector
  double phi = 0.0;       // phase
};

struct Jet {
  TorusPoint image;
  Mat2 D;
  SecondDeriv D2;
};

class Diffeo {
 public:
  // |det(linear)| must be 1; the perturbation C1 size (sum of 2*pi*|k|*|a|)
  // must be < 1 so the map stays a global diffeomorphism.
  Diffeo(const Mat2& linear, std::vector<FourierMode> modes = {},
         std::string name = "");

  const Mat2& linear() const { return lin_; }
  const std::vector<FourierMode>& modes() const { return modes_; }
  const std::string& name() const { return name_; }

  // lifted map R^2 -> R^2 (no wrapping); well-defined since the perturbation
  // is Z^2-periodic
  Vec2 eval_lift(const Vec2& p) const;
  TorusPoint eval(const TorusPoint& p) const;
  Jet jet(const TorusPoint& p) const;
  Mat2 deriv(const TorusPoint& p) const;
  double jacobian(const TorusPoint& p) const;

  // Newton inverse seeded at linear^-1(q); tolerance 1e-13, cap 64 iterations.
  TorusPoint inverse_eval(const TorusPoint& q) const;

  // sum of 2*pi*|k|*|a| over modes
  double perturbation_c1() const { return pert_c1_; }
  // analytic bound on the r-th derivative of the perturbation, r >= 1
  double perturbation_deriv_bound(int r) const;

  // Grid sup of max(|Df|, |D2f|, |Df^-1|, |D2f^-1|) plus a Lipschitz safety
  // margin derived from the analytic third-derivative budget. An e^{C0'}
  // candidate.
  double c2_bound(int grid_n = 32) const;

 private:
  Mat2 lin_;
  Mat2 lin_inv_;
  std::vector<FourierMode> modes_;
  std::string name_;
  double pert_c1_ = 0.0;
};

// Finite sequence of indices into a diffeo table.
struct Word {
  std::vector<uint32_t> indices;
  size_t size() const { return indices.size(); }
};

struct WeightedWord {
  Word word;
  double weight = 0.0;
};

class DrivingMeasure {
 public:
  DrivingMeasure(std::vector<Diffeo> support, std::vector<double> probs);

  const std::vector<Diffeo>& support() const { return support_; }
  const std::vector<double>& probs() const { return probs_; }
  const Diffeo& atom(uint32_t i) const { return support_[i]; }
  size_t arity() const { return support_.size(); }

  Word sample_word(size_t n, Xoshiro256pp& rng) const;
  // All words of length n with product weights; throws when arity^n exceeds
  // the cap.
  std::vector<WeightedWord> enumerate_words(size_t n, size_t cap = 1000000) const;
  double word_weight(const Word& w) const;

 private:
  std::vector<Diffeo> support_;
  std::vector<double> probs_;
};

struct CocycleResult {
  std::vector<TorusPoint> trajectory;  // trajectory[k] = f^k(p), k = 0..n
  std::vector<Mat2> products;          // products[k] = D f^k(p), products[0] = I
  std::vector<double> log_jacobians;   // log |det products[k]|
};

CocycleResult cocycle(const DrivingMeasure& mu, const Word& w, const TorusPoint& p);

// Derivative-only walk: returns D f^n(p) and the trajectory endpoint.
struct CocycleTip {
  TorusPoint end;
  Mat2 product;
  double log_jac = 0.0;
};
CocycleTip cocycle_tip(const DrivingMeasure& mu, const Word& w, const TorusPoint& p);

// n-fold preimage of x under the word (inverts letters in reverse order).
TorusPoint word_preimage(const DrivingMeasure& mu, const Word& w, const TorusPoint& x);

// Named constants of the analysis, with derivations and validity checks.
struct Constants {
  double C0p = 1.0;       // log C2-norm budget
  double C0 = 0.1;        // Jacobian drift offset
  double eps0 = 1e-3;     // Jacobian drift rate
  double C1 = 0.1;        // expansion certificate level
  int N = 1;              // certificate horizon
  double delta = 0.1;     // moment exponent
  double chibar = 0.0;    // tail rate, in (0, min{chi, delta*C0p/2})
  double eta = 0.25;      // tail/goodness parameter
  int p0 = 10;            // block length
  double c = 0.05;        // expansion rate for tail predicates
  double c_retention = 0.2;  // pipeline mass-retention target
  double C3 = 1.0;        // angle-tail constant (existential; configured)
  double K_seed = 1.0, L_seed = 1.0;

  // derived
  double C2() const;                  // ln(4e/3)
  double chi() const;                 // delta*C1/(2N)
  double lambda() const;              // chi/delta
  double lambdabar() const;           // chibar/delta
  double lambdahat() const;           // min(lambdabar/2, 1)
  double beta1() const;               // min(beta1prime, 1, chi - chibar)
  double beta1prime() const;
  double C6() const;                  // good-word counting constant
  double beta2() const;               // lambdahat*beta1/16
  double K1(double rate) const;       // curvature-growth constant K1(p0; rate)
  double K1prime(double rate) const;
  double K2(double rate) const;       // density-distortion constant K2(p0; rate)
  double Kpp() const;                 // K''(p0; lambdabar), pipeline curvature budget
  double Lpp() const;                 // L''(p0; lambdabar), pipeline density budget
  double Cpp4 = 5.0;                  // documented Stirling constant (valid n*eta >= 1/4)
  double C1prime() const { return 2.0 * Cpp4; }

  // Every checkable inequality, with both sides; ok == all hold.
  struct Check {
    std::string name;
    bool ok;
    double lhs, rhs;
  };
  std::vector<Check> validate() const;
  bool valid() const;
};

// Built-in example systems.
DrivingMeasure make_ab_system(double pert_amplitude = 0.0);
Diffeo make_cat_map();  // linear (2 1; 1 1)

}  // namespace rdslab
