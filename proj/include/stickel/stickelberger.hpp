#pragma once

// Partial zeta values at non-positive integers and higher Stickelberger
// elements for abelian extensions of Q.

#include <optional>
#include <vector>

#include "stickel/groupring.hpp"

namespace stickel {

struct ThetaElement {
  GroupRingElement element;
  unsigned n = 0;
  Int b_norm;
  std::uint64_t sigma_b = 1;  // canonical representative
  std::uint64_t fprime = 1;

  const GroupPtr& group() const { return element.group(); }
  /// Element plus the inputs it was built from.
  Json to_json() const;
};

/// zeta_{f'}(sigma, -n) for every sigma in G, indexed by group index.
/// Requires every prime of the conductor of F to divide f'.
std::vector<Rat> partial_zetas(const AbelianGaloisGroup& g, std::uint64_t fprime, unsigned n);
Rat partial_zeta(const AbelianGaloisGroup& g, std::uint64_t fprime, std::uint64_t sigma, unsigned n);

/// Theta_n(b, f') = (1 - Nb^{n+1} sigma_b^{-1}) sum_sigma zeta_{f'}(sigma, -n) sigma^{-1}.
ThetaElement theta(const GroupPtr& g, unsigned n, const Int& b_norm, std::uint64_t sigma_b, std::uint64_t fprime);
/// Same with b a rational integer, sigma_b its Frobenius.
ThetaElement theta(const GroupPtr& g, unsigned n, std::uint64_t b, std::uint64_t fprime);

struct IntegralityResult {
  bool integral = true;
  std::optional<std::uint64_t> witness;  // representative of an offending coefficient
};
/// Throws InternalInconsistency if the element fails to be l-integral even
/// though gcd(Nb, w_{n+1}(F)_l) = 1.
IntegralityResult integrality_check(const ThetaElement& t, std::uint64_t l);

struct CongruenceResult {
  bool holds = true;
  bool vacuous = false;
  Int w;  // w_n(F)_l
  std::optional<GroupRingElement> twisted_theta0;  // t_n(Theta_0 mod w)
  std::optional<GroupRingElement> theta_n;         // Theta_n mod w
};
/// t_n(Theta_0(b, f')) = Theta_n(b, f') modulo w_n(F)_l.
CongruenceResult dr_congruence_check(const GroupPtr& g, std::uint64_t b, std::uint64_t fprime, unsigned n,
                                     std::uint64_t l);

struct IdealDatum {
  Int norm;
  std::uint64_t sigma = 1;
};

struct ThetaProductResult {
  bool holds = false;
  GroupRingElement lhs;
  GroupRingElement rhs;
};
/// Theta_0(ad, f') = Nd sigma_d^{-1} Theta_0(a, f') + Theta_0(d, f').
ThetaProductResult theta_product_check(const GroupPtr& g, const IdealDatum& a, const IdealDatum& d,
                                       std::uint64_t fprime);

/// (1 + j) x = 0. Throws InvalidInput when F is totally real.
bool minus_part_check(const GroupRingElement& x);
bool minus_part_check(const ThetaElement& t);

/// omega^i-component of Theta_n(b, f') mod l^k, computed from the group ring
/// element and again from generalized Bernoulli numbers; the two must agree.
PadicResidue char_L_value(const GroupPtr& g, long i, unsigned n, std::uint64_t b, std::uint64_t fprime,
                          std::uint64_t l, int k);

/// Order of vanishing at s = 0 of L_{f'}(omega^i, s), counted over places of F.
unsigned vanishing_order(const GroupPtr& g, long i, std::uint64_t fprime, std::uint64_t l);

}  // namespace stickel
