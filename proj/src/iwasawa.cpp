#include "stickel/iwasawa.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <thread>

namespace stickel {

namespace {

Int Z(std::uint64_t x) { return Int(static_cast<unsigned long>(x)); }

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

Json opt_u64(const std::optional<std::uint64_t>& x) { return x ? Json(std::to_string(*x)) : Json(nullptr); }

}  // namespace

Json AdmissibleB::to_json() const {
  Json j;
  j["b"] = std::to_string(b);
  j["l"] = std::to_string(l);
  j["primitive_root_ok"] = primitive_root_ok;
  j["second_condition_ok"] = second_condition_ok;
  j["admissible"] = admissible();
  return j;
}

AdmissibleB check_b(std::uint64_t b, std::uint64_t l) {
  if (l == 2 || !is_prime_u64(l)) throw InvalidInput("l must be an odd prime");
  if (b % l == 0) throw InvalidInput("b must be prime to l");
  AdmissibleB a{b, l, false, false};
  a.primitive_root_ok = multiplicative_order(b % l, l) == l - 1;
  Int l2 = Z(l) * Z(l);
  Int w = teichmuller(Z(b), l, 2).value();
  a.second_condition_ok = mod_floor(Z(b) - w, l2) != 0;
  return a;
}

AdmissibleB smallest_admissible_b(std::uint64_t l, bool require_odd) {
  for (std::uint64_t b = 2;; ++b) {
    if (b % l == 0 || (require_odd && b % 2 == 0)) continue;
    auto a = check_b(b, l);
    if (a.admissible()) return a;
  }
}

bool w_identity_check(const AdmissibleB& b, unsigned n_max) {
  if (!b.admissible()) throw InvalidInput("b is not admissible");
  for (unsigned n = 0; n <= n_max; ++n) {
    Int x = ipow(Z(b.b), n + 1) - 1;
    long v = x == 0 ? -1 : padic_val(x, b.l);
    Int w = w_n_global(1, static_cast<long>(n) + 1, b.l);
    if (v != padic_val(w, b.l)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Json EigenspaceOrder::to_json() const {
  Json j;
  j["l"] = std::to_string(l);
  j["i"] = std::to_string(i);
  j["eigenspace"] = std::to_string(eigenspace());
  j["b"] = std::to_string(b);
  j["order"] = order.get_str();
  j["exponent"] = std::to_string(exponent);
  j["precision"] = std::to_string(precision);
  j["value"] = value.get_str();
  return j;
}

namespace {

GroupRingElement theta0_for(std::uint64_t l, std::uint64_t b) {
  static std::mutex mu;
  static std::map<std::pair<std::uint64_t, std::uint64_t>, GroupRingElement> cache;
  {
    std::scoped_lock lock(mu);
    auto it = cache.find({l, b});
    if (it != cache.end()) return it->second;
  }
  auto t = theta(AbelianGaloisGroup::make(l), 0, b, l).element;
  std::scoped_lock lock(mu);
  return cache.emplace(std::make_pair(l, b), t).first->second;
}

}  // namespace

EigenspaceOrder eigenspace_order(std::uint64_t l, long i, const AdmissibleB& b, int k) {
  if (l == 2 || !is_prime_u64(l)) throw InvalidInput("l must be an odd prime");
  if (i < 1 || i >= static_cast<long>(l) - 1 || i % 2 == 0) {
    throw InvalidInput("eigenspace index i must be odd with 1 <= i < l - 1");
  }
  if (b.l != l || !b.admissible()) throw InvalidInput("b is not admissible for l = " + std::to_string(l));
  if (k < 1) throw InvalidInput("precision must be at least 1");
  auto t = theta0_for(l, b.b);
  EigenspaceOrder e{l, i, b.b, 1, 0, k, 0};
  std::optional<int> previous;
  for (;;) {
    PadicResidue v = omega_char_value(t, -i, l, e.precision);
    if (!v.is_zero()) {
      e.exponent = v.valuation();
      e.value = v.value();
      if (previous && *previous != e.exponent) throw InternalInconsistency("eigenspace exponent moved with precision");
      break;
    }
    if (e.precision >= 256) throw InternalInconsistency("omega component vanishes to precision l^256");
    e.precision *= 2;
  }
  // One extra precision step must reproduce the exponent.
  PadicResidue check = omega_char_value(t, -i, l, e.precision + 1);
  if (check.valuation() != e.exponent) throw InternalInconsistency("eigenspace exponent moved with precision");
  e.order = ipow(Z(l), static_cast<unsigned long>(e.exponent));
  return e;
}

bool herbrand_cross_check(std::uint64_t l, long j, const Int& order) {
  if (j < 1 || j >= static_cast<long>(l) - 1 || j % 2 == 0) throw InvalidInput("j must be an odd eigenspace index");
  unsigned k = static_cast<unsigned>(static_cast<long>(l) - j);
  Int num(bernoulli(k).get_num());
  bool divides = mpz_divisible_ui_p(num.get_mpz_t(), l) != 0;
  bool nontrivial = order > 1;
  if (divides != nontrivial) {
    throw InternalInconsistency("A^[" + std::to_string(j) + "] for l = " + std::to_string(l) + " has order " +
                                order.get_str() + " but l " + (divides ? "divides" : "does not divide") +
                                " the numerator of B_" + std::to_string(k));
  }
  return true;
}

PrimeSearch prime_search(std::uint64_t l, int m_exact, std::uint64_t M, std::size_t count, std::uint64_t bound) {
  if (!is_prime_u64(l)) throw InvalidInput("l must be prime");
  if (m_exact < 1) throw InvalidInput("the exact exponent must be at least 1");
  if (M == 0) throw InvalidInput("M must be positive");
  PrimeSearch s;
  if (val_u64(M, l) > m_exact) {
    s.exhausted = true;
    return s;
  }
  std::uint64_t step = lcm_u64(M, 1);
  std::uint64_t lm = 1;
  for (int i = 0; i < m_exact; ++i) lm *= l;
  step = lcm_u64(step, lm);
  for (std::uint64_t q = step + 1; q <= bound && s.primes.size() < count; q += step) {
    if ((q - 1) % (lm * l) == 0) continue;
    if (is_prime_u64(q)) s.primes.push_back(q);
  }
  s.exhausted = s.primes.size() < count;
  return s;
}

// ---------------------------------------------------------------------------

Json PowerClassValue::to_json() const {
  Json j;
  j["q"] = std::to_string(q);
  j["r"] = std::to_string(r);
  j["y"] = std::to_string(y);
  j["rho"] = std::to_string(rho);
  j["t"] = opt_u64(t);
  return j;
}

PowerClassValue project_powerclass(const CycloFrac& lambda, std::uint64_t l, unsigned n, std::uint64_t q,
                                   int scheme) {
  if (lambda.modulus() != l) throw InvalidInput("lambda must lie in Q(mu_l)");
  if (!is_prime_u64(q) || (q - 1) % l != 0) throw InvalidInput("q must be a prime = 1 mod l");
  PowerClassValue v;
  v.q = q;
  auto t = DlogTable::get(q);
  v.r = powmod_u64(t->g, (q - 1) / l, q);
  Int qz = Z(q);
  Int den = mod_floor(lambda.den(), qz);
  if (den == 0) throw InvalidInput("lambda is not a unit at q = " + std::to_string(q));
  Int den_inv;
  mpz_invert(den_inv.get_mpz_t(), den.get_mpz_t(), qz.get_mpz_t());
  // e_{omega^{-n}} = sum_c -c^n sigma_c modulo l.
  Int X = 1;
  for (std::uint64_t c = 1; c < l; ++c) {
    Int root = Z(powmod_u64(v.r, c, q));
    Int val = mod_floor(lambda.num().eval_mod(root, qz) * den_inv, qz);
    if (val == 0) throw InvalidInput("lambda vanishes at a prime above q = " + std::to_string(q));
    long e = static_cast<long>((l - powmod_u64(c, n, l)) % l);
    if (scheme == 1) e -= static_cast<long>(l);
    Int term;
    if (e >= 0) {
      mpz_powm_ui(term.get_mpz_t(), val.get_mpz_t(), static_cast<unsigned long>(e), qz.get_mpz_t());
    } else {
      Int inv;
      mpz_invert(inv.get_mpz_t(), val.get_mpz_t(), qz.get_mpz_t());
      mpz_powm_ui(term.get_mpz_t(), inv.get_mpz_t(), static_cast<unsigned long>(-e), qz.get_mpz_t());
    }
    X = mod_floor(X * term, qz);
  }
  Int y;
  mpz_powm_ui(y.get_mpz_t(), X.get_mpz_t(), (q - 1) / l, qz.get_mpz_t());
  v.y = y.get_ui();
  v.rho = powmod_u64(v.r, (q - 1) / l, q);
  if (v.rho != 1) {
    std::uint64_t acc = 1;
    for (std::uint64_t tt = 0; tt < l; ++tt) {
      if (acc == v.y) {
        v.t = tt;
        break;
      }
      acc = mulmod(acc, v.rho, q);
    }
    if (!v.t) throw InternalInconsistency("projection is not an l-th root of unity");
  }
  return v;
}

Json PowerClassCertificate::to_json() const {
  Json j;
  j["certified"] = certified;
  Json tab = Json::array();
  for (const auto& v : table) tab.push_back(v.to_json());
  j["table"] = tab;
  Json w = Json::array();
  for (auto q : witness) w.push_back(std::to_string(q));
  j["witness"] = w;
  j["consistent"] = std::to_string(consistent);
  return j;
}

PowerClassCertificate powerclass_test(const CycloFrac& lambda, unsigned n, std::uint64_t l,
                                      const std::vector<std::uint64_t>& q_list, unsigned jobs) {
  PowerClassCertificate cert;
  cert.table.resize(q_list.size());
  std::vector<std::exception_ptr> errors(q_list.size());
  auto work = [&](std::size_t i) {
    try {
      auto a = project_powerclass(lambda, l, n, q_list[i], 0);
      auto b = project_powerclass(lambda, l, n, q_list[i], 1);
      if (a.y != b.y) throw InternalInconsistency("idempotent representative schemes disagree");
      cert.table[i] = a;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  unsigned nthreads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(q_list.size())));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < q_list.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < q_list.size(); i += nthreads) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (cert.table.empty()) return cert;
  for (const auto& v : cert.table) {
    if (v.t && cert.table[0].t && *v.t == *cert.table[0].t) ++cert.consistent;
  }
  std::vector<std::uint64_t> witness;
  for (std::uint64_t j = 0; j < l; ++j) {
    std::optional<std::uint64_t> w;
    for (const auto& v : cert.table) {
      if (v.t && *v.t != j) {
        w = v.q;
        break;
      }
    }
    if (!w) return cert;
    witness.push_back(*w);
  }
  cert.certified = true;
  cert.witness = std::move(witness);
  return cert;
}

bool recheck_powerclass(const CycloFrac& lambda, unsigned n, std::uint64_t l, const PowerClassCertificate& cert) {
  if (lambda.modulus() != l) return false;
  std::map<std::uint64_t, std::uint64_t> t_of;
  for (const auto& v : cert.table) {
    std::uint64_t q = v.q;
    if (!is_prime_u64(q) || (q - 1) % l != 0) return false;
    // r must be a root of Phi_l mod q, i.e. of exact order l.
    if (v.r == 1 || powmod_u64(v.r, l, q) != 1) return false;
    std::uint64_t den = mod_floor(lambda.den(), Z(q)).get_ui();
    if (den == 0) return false;
    std::uint64_t den_inv = invmod_u64(den, q);
    std::uint64_t y = 1;
    for (std::uint64_t c = 1; c < l; ++c) {
      std::uint64_t rc = powmod_u64(v.r, c, q);
      std::uint64_t acc = 0;
      const auto& co = lambda.num().coeffs();
      for (std::size_t i = co.size(); i-- > 0;) {
        acc = (mulmod(acc, rc, q) + mod_floor(co[i], Z(q)).get_ui()) % q;
      }
      acc = mulmod(acc, den_inv, q);
      if (acc == 0) return false;
      // Exponent -c^n (q-1)/l applied directly.
      std::uint64_t e = mulmod((l - powmod_u64(c, n, l)) % l, (q - 1) / l, q - 1);
      y = mulmod(y, powmod_u64(acc, e, q), q);
    }
    if (y != v.y) return false;
    std::uint64_t rho = powmod_u64(v.r, (q - 1) / l, q);
    if (rho != v.rho) return false;
    if (v.t) {
      if (powmod_u64(rho, *v.t, q) != y) return false;
      t_of[q] = *v.t;
    }
  }
  if (!cert.certified) return true;
  if (cert.witness.size() != l) return false;
  for (std::uint64_t j = 0; j < l; ++j) {
    auto it = t_of.find(cert.witness[j]);
    if (it == t_of.end() || it->second == j) return false;
  }
  return true;
}

std::string to_string(CyclicVerdict v) {
  switch (v) {
    case CyclicVerdict::certified_cyclic:
      return "certified-cyclic";
    case CyclicVerdict::consistent_cyclic:
      return "consistent-cyclic";
    default:
      return "unknown";
  }
}

Json ProbeEvidence::to_json() const {
  Json j;
  j["p"] = std::to_string(p);
  j["r"] = std::to_string(r);
  j["lambda"] = lambda.to_json();
  j["test"] = test.to_json();
  return j;
}

Json EigenspaceReport::to_json() const {
  Json j;
  j["l"] = std::to_string(l);
  j["n"] = std::to_string(n);
  j["eigenspace"] = std::to_string(eigenspace);
  j["b"] = b.to_json();
  j["order"] = order.to_json();
  j["verdict"] = to_string(verdict);
  j["order_implies_cyclic"] = order_implies_cyclic;
  j["required_valuation"] = std::to_string(required_valuation);
  Json ev = Json::array();
  for (const auto& e : evidence) ev.push_back(e.to_json());
  j["evidence"] = ev;
  return j;
}

EigenspaceReport cyclicity_probe(std::uint64_t l, unsigned n, const ProbeBounds& bounds,
                                 std::optional<AdmissibleB> b, unsigned jobs) {
  if (l == 2 || !is_prime_u64(l)) throw InvalidInput("l must be an odd prime");
  if (n % 2 == 0 || n < 1 || n >= l - 1) throw InvalidInput("n must be odd with 1 <= n < l - 1");
  if (bounds.max_p == 0 || bounds.max_q == 0) throw InvalidInput("search bounds must be positive");
  EigenspaceReport rep;
  rep.l = l;
  rep.n = n;
  rep.eigenspace = static_cast<long>(l) - 1 - static_cast<long>(n);
  rep.b = b ? *b : smallest_admissible_b(l, true);
  if (rep.b.b % 2 == 0) throw InvalidInput("b must be odd for elements of Q(mu_l)");
  rep.order = eigenspace_order(l, static_cast<long>(n), rep.b);
  rep.order_implies_cyclic = rep.order.order <= Z(l);
  Rat zeta = -bernoulli(n + 1) / Rat(n + 1);
  Rat x = Rat(1 - ipow(Z(rep.b.b), n + 1)) * zeta;
  auto v = padic_val(x, l);
  rep.required_valuation = static_cast<int>(v ? std::max(0L, *v) : 0);
  if (rep.order.order == 1) {
    rep.verdict = CyclicVerdict::consistent_cyclic;
    return rep;
  }
  Int need = ipow(Z(l), static_cast<unsigned long>(rep.required_valuation));
  std::vector<std::uint64_t> ps;
  for (std::uint64_t p = l + 1; p <= bounds.p_bound && ps.size() < bounds.max_p; p += l) {
    if (!is_prime_u64(p) || p == rep.b.b) continue;
    if (!mpz_divisible_p(Int(ipow(Z(p), n) - 1).get_mpz_t(), need.get_mpz_t())) continue;
    ps.push_back(p);
  }
  for (auto p : ps) {
    auto found = prime_search(l, 1, l, bounds.max_q + 2, bounds.q_bound);
    std::vector<std::uint64_t> qs;
    for (auto q : found.primes) {
      if (q != p && rep.b.b % q != 0 && qs.size() < bounds.max_q) qs.push_back(q);
    }
    auto lam = bs_element(rep.b.b, ResidueCharacter(p, l));
    ProbeEvidence ev{p, lam.r, lam, powerclass_test(lam.value, n, l, qs, jobs)};
    bool done = ev.test.certified;
    rep.evidence.push_back(std::move(ev));
    if (done) {
      rep.verdict = CyclicVerdict::certified_cyclic;
      return rep;
    }
  }
  rep.verdict = CyclicVerdict::unknown;
  return rep;
}

Json KuriharaReport::to_json() const {
  Json j;
  j["l"] = std::to_string(l);
  j["n"] = std::to_string(n);
  if (div) {
    j["div_order"] = div->order.get_str();
    j["div_hypothesis_ok"] = div->hypothesis_ok;
  }
  if (eigen) j["eigenspace"] = eigen->to_json();
  if (probe) j["probe_verdict"] = to_string(*probe);
  j["consistent"] = consistent;
  j["note"] = note;
  return j;
}

KuriharaReport kurihara_report(std::uint64_t l, unsigned n, bool run_probe, const ProbeBounds& bounds,
                               unsigned jobs) {
  if (l == 2 || !is_prime_u64(l)) throw InvalidInput("l must be an odd prime");
  if (n < 1) throw InvalidInput("n must be at least 1");
  KuriharaReport r;
  r.l = l;
  r.n = n;
  if (n % 2 == 0) {
    r.note = "n even: zeta(-n) = 0 and w_{n+1}(Q)_l = " + w_n_global(1, static_cast<long>(n) + 1, l).get_str() +
             "; only the vanishing equivalence applies, no probe";
    return r;
  }
  r.div = div_order(n, l);
  if (n < l - 1) {
    auto b = smallest_admissible_b(l, true);
    r.eigen = eigenspace_order(l, static_cast<long>(n), b);
    bool div_trivial = r.div->order == 1;
    bool eig_trivial = r.eigen->order == 1;
    r.consistent = div_trivial == eig_trivial;
    if (!r.consistent) {
      throw InternalInconsistency("|D(" + std::to_string(n) + ")_l| = " + r.div->order.get_str() + " but |A^[" +
                                  std::to_string(r.eigen->eigenspace()) + "]| = " + r.eigen->order.get_str());
    }
    r.note = r.div->order == r.eigen->order ? "orders agree" : "orders differ, triviality agrees";
    if (run_probe) r.probe = cyclicity_probe(l, n, bounds, b, jobs).verdict;
  } else {
    r.note = "n >= l - 1: eigenspace index out of range, D(n)_l order only";
  }
  return r;
}

}  // namespace stickel
