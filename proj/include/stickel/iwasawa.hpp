#pragma once

// Eigenspaces of the l-part of the class group of Q(mu_l): admissible b,
// Mazur-Wiles orders, auxiliary primes and the power-class cyclicity probe.

#include <optional>
#include <string>
#include <vector>

#include "stickel/cyclotomic.hpp"
#include "stickel/kshadow.hpp"

namespace stickel {

struct AdmissibleB {
  std::uint64_t b = 0;
  std::uint64_t l = 0;
  bool primitive_root_ok = false;
  bool second_condition_ok = false;  // b != omega(b) mod l^2
  bool admissible() const { return primitive_root_ok && second_condition_ok; }
  Json to_json() const;
};

AdmissibleB check_b(std::uint64_t b, std::uint64_t l);
/// Least admissible b >= 2 (odd when require_odd, as needed for Q(mu_l)
/// elements where b must be prime to 2l).
AdmissibleB smallest_admissible_b(std::uint64_t l, bool require_odd = false);
/// v_l(1 - b^{n+1}) = v_l(w_{n+1}(Q)) for 0 <= n <= n_max.
bool w_identity_check(const AdmissibleB& b, unsigned n_max);

struct EigenspaceOrder {
  std::uint64_t l = 0;
  long i = 0;             // omega^{-i} component of Theta_0; eigenspace A^{[l-1-i]}
  std::uint64_t b = 0;
  Int order;
  int exponent = 0;
  int precision = 0;      // final working precision
  Int value;              // omega^{-i}(Theta_0) mod l^precision
  long eigenspace() const { return static_cast<long>(l) - 1 - i; }
  Json to_json() const;
};
/// |A^{[l-1-i]}| for odd i, 1 <= i < l - 1.
EigenspaceOrder eigenspace_order(std::uint64_t l, long i, const AdmissibleB& b, int k = 2);

/// For the eigenspace A^{[j]}: (order > 1) agrees with l | numerator(B_{l-j}).
/// Disagreement throws InternalInconsistency.
bool herbrand_cross_check(std::uint64_t l, long j, const Int& order);

struct PrimeSearch {
  std::vector<std::uint64_t> primes;
  bool exhausted = false;
};
/// Primes q <= bound with l^m_exact || q - 1 and q = 1 mod M, increasing.
PrimeSearch prime_search(std::uint64_t l, int m_exact, std::uint64_t M, std::size_t count, std::uint64_t bound);

struct PowerClassValue {
  std::uint64_t q = 0;
  std::uint64_t r = 0;    // root of Phi_l mod q used as the embedding
  std::uint64_t y = 0;    // (e lambda)^{(q-1)/l} in F_q
  std::uint64_t rho = 0;  // r^{(q-1)/l}
  std::optional<std::uint64_t> t;  // y = rho^t

  Json to_json() const;
};
/// Image of e_{omega^{-n}} lambda in mu_l subset F_q. lambda lies in Q(mu_l).
/// scheme 0 takes exponents in [0, l), scheme 1 in (-l, 0].
PowerClassValue project_powerclass(const CycloFrac& lambda, std::uint64_t l, unsigned n, std::uint64_t q,
                                   int scheme = 0);

struct PowerClassCertificate {
  bool certified = false;
  std::vector<PowerClassValue> table;
  /// For each twist j = 0..l-1, a prime q at which zeta^{-j} e lambda is not
  /// an l-th power (only when certified).
  std::vector<std::uint64_t> witness;
  std::size_t consistent = 0;  // number of q agreeing with the first one
  Json to_json() const;
};
PowerClassCertificate powerclass_test(const CycloFrac& lambda, unsigned n, std::uint64_t l,
                                      const std::vector<std::uint64_t>& q_list, unsigned jobs = 1);
/// Re-derives every entry of a certificate from lambda with modular
/// arithmetic only.
bool recheck_powerclass(const CycloFrac& lambda, unsigned n, std::uint64_t l, const PowerClassCertificate& cert);

enum class CyclicVerdict { certified_cyclic, consistent_cyclic, unknown };
std::string to_string(CyclicVerdict v);

struct ProbeBounds {
  std::size_t max_p = 5;
  std::size_t max_q = 10;
  std::uint64_t p_bound = 1000000;
  std::uint64_t q_bound = 1000000;
};

struct ProbeEvidence {
  std::uint64_t p = 0;
  std::uint64_t r = 0;  // attached root of the prime w above p
  BrumerStarkElement lambda;
  PowerClassCertificate test;
  Json to_json() const;
};

struct EigenspaceReport {
  std::uint64_t l = 0;
  unsigned n = 0;
  long eigenspace = 0;
  AdmissibleB b;
  EigenspaceOrder order;
  CyclicVerdict verdict = CyclicVerdict::unknown;
  bool order_implies_cyclic = false;  // order <= l
  int required_valuation = 0;         // l^v must divide p^n - 1
  std::vector<ProbeEvidence> evidence;
  Json to_json() const;
};
EigenspaceReport cyclicity_probe(std::uint64_t l, unsigned n, const ProbeBounds& bounds,
                                 std::optional<AdmissibleB> b = std::nullopt, unsigned jobs = 1);

struct KuriharaReport {
  std::uint64_t l = 0;
  unsigned n = 0;
  std::optional<DivOrder> div;
  std::optional<EigenspaceOrder> eigen;
  std::optional<CyclicVerdict> probe;
  bool consistent = true;
  std::string note;
  Json to_json() const;
};
/// Joins |D(n)_l|, the eigenspace order and (optionally) the probe verdict.
KuriharaReport kurihara_report(std::uint64_t l, unsigned n, bool run_probe = false,
                               const ProbeBounds& bounds = {}, unsigned jobs = 1);

}  // namespace stickel
