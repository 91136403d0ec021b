#include "stickel/stickelberger.hpp"

#include <algorithm>
#include <set>

namespace stickel {

Json ThetaElement::to_json() const {
  Json j = element.to_json();
  Json prov;
  prov["n"] = std::to_string(n);
  prov["b_norm"] = b_norm.get_str();
  prov["sigma_b"] = std::to_string(sigma_b);
  prov["fprime"] = std::to_string(fprime);
  prov["field"] = group()->describe();
  j["provenance"] = prov;
  return j;
}

std::vector<Rat> partial_zetas(const AbelianGaloisGroup& g, std::uint64_t fprime, unsigned n) {
  if (fprime == 0) throw InvalidInput("f' must be positive");
  std::uint64_t cond = g.conductor();
  std::uint64_t rad_f = radical(fprime);
  for (auto p : prime_factors(cond)) {
    if (rad_f % p != 0) {
      throw InvalidInput("f' = " + std::to_string(fprime) + " misses the conductor prime " + std::to_string(p));
    }
  }
  std::uint64_t M = lcm_u64(cond, rad_f);
  // M^n B_{n+1}(r/M) = (1/M) sum_j C(n+1, j) B_j M^j r^{n+1-j}.
  std::vector<Int> coef(n + 2);  // coefficient of r^{n+1-j}, scaled to integers
  Int den = 1;
  std::vector<Rat> c(n + 2);
  Int Mz(static_cast<unsigned long>(M));
  for (unsigned j = 0; j <= n + 1; ++j) {
    c[j] = Rat(binomial(n + 1, j)) * bernoulli(j) * Rat(ipow(Mz, j));
    den = lcm(den, Int(c[j].get_den()));
  }
  for (unsigned j = 0; j <= n + 1; ++j) coef[j] = Int(c[j] * Rat(den));
  std::vector<Int> acc(g.order(), Int(0));
  for (std::uint64_t r = 1; r <= M; ++r) {
    if (gcd_u64(r, fprime) != 1) continue;
    Int rz(static_cast<unsigned long>(r));
    Int v = 0;
    for (unsigned j = 0; j <= n + 1; ++j) v = v * rz + coef[j];
    acc[g.index_of(r)] += v;
  }
  std::vector<Rat> out(g.order());
  Rat scale = Rat(-1) / (Rat(Mz) * Rat(den) * Rat(n + 1));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Rat(acc[i]) * scale;
    out[i].canonicalize();
  }
  return out;
}

Rat partial_zeta(const AbelianGaloisGroup& g, std::uint64_t fprime, std::uint64_t sigma, unsigned n) {
  std::size_t idx = g.index_of(sigma);
  return partial_zetas(g, fprime, n)[idx];
}

ThetaElement theta(const GroupPtr& g, unsigned n, const Int& b_norm, std::uint64_t sigma_b, std::uint64_t fprime) {
  if (b_norm < 1) throw InvalidInput("Nb must be positive");
  Int fz(static_cast<unsigned long>(fprime));
  if (gcd(b_norm, fz) != 1) {
    throw InvalidInput("b (norm " + b_norm.get_str() + ") is not coprime to f' = " + std::to_string(fprime));
  }
  auto z = partial_zetas(*g, fprime, n);
  GroupRingElement s(g);
  for (std::size_t i = 0; i < z.size(); ++i) s.add(g->inv(i), z[i]);
  GroupRingElement e = euler_factor(g, ipow(b_norm, n + 1), sigma_b);
  ThetaElement t{e * s, n, b_norm, g->rep(g->index_of(sigma_b)), fprime};
  return t;
}

ThetaElement theta(const GroupPtr& g, unsigned n, std::uint64_t b, std::uint64_t fprime) {
  if (b == 0) throw InvalidInput("b must be positive");
  if (gcd_u64(b, fprime) != 1) {
    throw InvalidInput("b = " + std::to_string(b) + " is not coprime to f' = " + std::to_string(fprime));
  }
  return theta(g, n, Int(static_cast<unsigned long>(b)), b, fprime);
}

IntegralityResult integrality_check(const ThetaElement& t, std::uint64_t l) {
  IntegralityResult r;
  if (auto bad = t.element.non_integral_at(l)) {
    r.integral = false;
    r.witness = t.group()->rep(*bad);
    Int w = w_n_part(*t.group(), static_cast<long>(t.n) + 1, l);
    if (gcd(t.b_norm, w) == 1) {
      throw InternalInconsistency("Theta_" + std::to_string(t.n) + " is not " + std::to_string(l) +
                                  "-integral although b is coprime to w_{n+1}(F)_l");
    }
  }
  return r;
}

CongruenceResult dr_congruence_check(const GroupPtr& g, std::uint64_t b, std::uint64_t fprime, unsigned n,
                                     std::uint64_t l) {
  if (n == 0) throw InvalidInput("the congruence compares Theta_0 with Theta_n for n >= 1");
  CongruenceResult r;
  r.w = w_n_part(*g, static_cast<long>(n), l);
  if (r.w == 1) {
    r.vacuous = true;
    return r;
  }
  if (b % l == 0) throw InvalidInput("b must be coprime to w_{n+1}(F)_l");
  int k = static_cast<int>(padic_val(r.w, l));
  auto t0 = theta(g, 0, b, fprime);
  auto tn = theta(g, n, b, fprime);
  r.twisted_theta0 = twist_tn(t0.element.reduce(l, k), static_cast<long>(n), l);
  r.theta_n = tn.element.reduce(l, k);
  r.holds = *r.twisted_theta0 == *r.theta_n;
  return r;
}

ThetaProductResult theta_product_check(const GroupPtr& g, const IdealDatum& a, const IdealDatum& d,
                                       std::uint64_t fprime) {
  std::uint64_t m = g->modulus() <= 2 ? 1 : g->modulus();
  std::uint64_t sigma_ad = m == 1 ? 1 : static_cast<std::uint64_t>(
      static_cast<unsigned __int128>(g->rep(g->index_of(a.sigma))) * g->rep(g->index_of(d.sigma)) % m);
  auto tad = theta(g, 0, a.norm * d.norm, sigma_ad, fprime);
  auto ta = theta(g, 0, a.norm, a.sigma, fprime);
  auto td = theta(g, 0, d.norm, d.sigma, fprime);
  GroupRingElement nd = GroupRingElement::basis(g, g->inv(g->index_of(d.sigma))).scaled(Rat(d.norm));
  GroupRingElement rhs = nd * ta.element + td.element;
  return {tad.element == rhs, tad.element, rhs};
}

bool minus_part_check(const GroupRingElement& x) {
  const auto& g = x.group();
  if (!g->is_cm()) throw InvalidInput("minus-part check is inapplicable: " + g->describe() + " is totally real");
  return (x + x.shifted(g->conjugation())).is_zero();
}

bool minus_part_check(const ThetaElement& t) {
  if (t.n != 0) throw InvalidInput("minus-part check applies to Theta_0");
  return minus_part_check(t.element);
}

PadicResidue char_L_value(const GroupPtr& g, long i, unsigned n, std::uint64_t b, std::uint64_t fprime,
                          std::uint64_t l, int k) {
  if (l == 2 || !is_prime_u64(l)) throw InvalidInput("char_L_value: l must be an odd prime");
  std::uint64_t m = g->modulus();
  if (m <= 2 || radical(m) != l) throw InvalidInput("char_L_value: the field must lie in Q(mu_{l^t})");
  if (b % l == 0) throw InvalidInput("char_L_value: b must be prime to l");
  // Route (a): the group ring element.
  auto t = theta(g, n, b, fprime);
  PadicResidue a = omega_char_value(t.element, i, l, k);

  // Route (b): (1 - b^{n+1} chi(b)) L_{f'}(chi, -n), chi = omega^{-i}.
  long ci = -i;
  bool trivial = ((ci % static_cast<long>(l - 1)) + static_cast<long>(l - 1)) % static_cast<long>(l - 1) == 0;
  std::uint64_t f = trivial ? 1 : l;
  Int fz(static_cast<unsigned long>(f));
  std::vector<Rat> q(f + 1);
  long e_den = 0;
  for (std::uint64_t aa = 1; aa <= f; ++aa) {
    q[aa] = Rat(ipow(fz, n)) * bernoulli_poly(n + 1, Rat(Int(static_cast<unsigned long>(aa)), fz));
    q[aa].canonicalize();
    if (auto v = padic_val(q[aa], l); v && *v < 0) e_den = std::max(e_den, -*v);
  }
  long vn1 = val_u64(n + 1, l);
  int K = k + static_cast<int>(e_den + vn1);
  Int L(static_cast<unsigned long>(l));
  Int mod = ipow(L, static_cast<unsigned long>(K));
  Int scale = ipow(L, static_cast<unsigned long>(e_den));
  auto chi = [&](std::uint64_t x) -> Int {
    if (trivial) return 1;
    if (x % l == 0) return 0;
    return teichmuller(Int(static_cast<unsigned long>(x)), l, K).pow(Int(ci)).value();
  };
  Int T = 0;
  for (std::uint64_t aa = 1; aa <= f; ++aa) {
    T += chi(aa) * rat_mod_prime_power(q[aa] * Rat(scale), l, K);
  }
  Int N = mod_floor(-T, mod);
  for (auto p : prime_factors(fprime)) {
    if (f % p == 0) continue;
    N = mod_floor(N * (1 - chi(p) * ipow(Int(static_cast<unsigned long>(p)), n)), mod);
  }
  Int bz(static_cast<unsigned long>(b));
  N = mod_floor(N * (1 - ipow(bz, n + 1) * chi(b)), mod);
  Int div = ipow(L, static_cast<unsigned long>(e_den + vn1));
  if (!mpz_divisible_p(N.get_mpz_t(), div.get_mpz_t())) {
    throw InternalInconsistency("generalized Bernoulli route is not l-integral");
  }
  Int u = Int(static_cast<unsigned long>(n + 1)) / ipow(L, static_cast<unsigned long>(vn1));
  Int outmod = ipow(L, static_cast<unsigned long>(k));
  Int uinv;
  mpz_invert(uinv.get_mpz_t(), u.get_mpz_t(), outmod.get_mpz_t());
  PadicResidue b_route(mod_floor((N / div) * uinv, outmod), l, k);
  if (!(a == b_route)) {
    throw InternalInconsistency("omega^" + std::to_string(i) + " value of Theta_" + std::to_string(n) +
                                ": group ring gives " + a.value().get_str() + ", Bernoulli route gives " +
                                b_route.value().get_str());
  }
  return a;
}

unsigned vanishing_order(const GroupPtr& g, long i, std::uint64_t fprime, std::uint64_t l) {
  auto table = omega_power_table(*g, i, l, 1);
  auto trivial_on = [&](const std::vector<std::size_t>& sub) {
    return std::all_of(sub.begin(), sub.end(), [&](std::size_t s) { return table[s] == 1; });
  };
  std::vector<std::size_t> all(g->order());
  for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
  bool chi_trivial = trivial_on(all);
  std::size_t ord = g->order();
  unsigned count = 0;
  unsigned finite_places = 0;
  for (auto p : prime_factors(fprime)) {
    auto dec = g->decomposition(p);
    unsigned places = static_cast<unsigned>(ord / dec.size());
    finite_places += places;
    if (trivial_on(dec)) count += places;
  }
  unsigned inf_places = g->is_cm() ? static_cast<unsigned>(ord / 2) : static_cast<unsigned>(ord);
  std::vector<std::size_t> dinf{0};
  if (g->is_cm()) dinf.push_back(g->conjugation());
  if (chi_trivial) return finite_places + inf_places - 1;
  if (trivial_on(dinf)) count += inf_places;
  return count;
}

}  // namespace stickel
