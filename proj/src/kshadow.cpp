#include "stickel/kshadow.hpp"

#include <algorithm>

namespace stickel {

namespace {

bool is_prime_power(std::uint64_t q) {
  if (q < 2) return false;
  auto f = prime_factors(q);
  return f.size() == 1;
}

Int Z(std::uint64_t x) { return Int(static_cast<unsigned long>(x)); }

}  // namespace

Json FiniteFieldKGroup::to_json() const {
  Json j;
  j["q"] = std::to_string(q);
  j["n"] = std::to_string(n);
  j["order"] = order.get_str();
  j["l"] = std::to_string(l);
  j["l_part_exponent"] = std::to_string(l_part_exponent);
  return j;
}

Int k_order(std::uint64_t q, unsigned n) {
  if (!is_prime_power(q)) throw InvalidInput("q = " + std::to_string(q) + " is not a prime power");
  if (n < 1) throw InvalidInput("n must be at least 1");
  return ipow(Z(q), n) - 1;
}

FiniteFieldKGroup k_group(std::uint64_t q, unsigned n, std::uint64_t l) {
  if (!is_prime_u64(l)) throw InvalidInput("l must be prime");
  FiniteFieldKGroup k{q, n, k_order(q, n), l, 0};
  k.l_part_exponent = static_cast<int>(padic_val(k.order, l));
  if (k.l_part_exponent > 0 && q % l != 0 && k.l_part_exponent <= val_u64(n, l)) {
    throw InternalInconsistency("v_l(q^n - 1) <= v_l(n) for q = " + std::to_string(q));
  }
  return k;
}

Int w_n_global(std::uint64_t m, long n, std::uint64_t l) { return w_n_part(*AbelianGaloisGroup::make(m), n, l); }

Int w_n_local(long n, std::uint64_t l) {
  if (n == 0) throw InvalidInput("w_n requires n != 0");
  if (!is_prime_u64(l)) throw InvalidInput("l must be prime");
  std::uint64_t an = static_cast<std::uint64_t>(n < 0 ? -n : n);
  int v = val_u64(an, l);
  // Z_l^x is the image of the cyclotomic character of Q_l.
  if (l == 2) return an % 2 ? Int(2) : ipow(Int(2), static_cast<unsigned long>(2 + v));
  if (an % (l - 1) != 0) return 1;
  return ipow(Z(l), static_cast<unsigned long>(1 + v));
}

DivOrder div_order(unsigned n, std::uint64_t l) {
  if (n % 2 == 0) throw InvalidInput("div_order needs n odd");
  if (l == 2 || !is_prime_u64(l)) throw InvalidInput("div_order needs an odd prime l");
  DivOrder d;
  d.zeta_value = -bernoulli(n + 1) / Rat(n + 1);
  d.w = w_n_global(1, static_cast<long>(n) + 1, l);
  d.hypothesis_ok = w_n_local(static_cast<long>(n), l) == 1;
  auto v = padic_val(Rat(d.w) * d.zeta_value, l);
  if (!v || *v < 0) throw InternalInconsistency("w_{n+1}(Q) zeta(-n) is not l-integral");
  d.order = ipow(Z(l), static_cast<unsigned long>(*v));
  return d;
}

Rat index_formula(long n, std::uint64_t l) {
  Rat r = make_rat(w_n_local(n, l), w_n_global(1, n, l));
  if (r != 1) throw InternalInconsistency("index formula for Q is not 1");
  return r;
}

GammaL gamma_l(unsigned n, std::uint64_t f, std::uint64_t l, const GroupPtr& g, int k) {
  if (!is_prime_u64(l)) throw InvalidInput("l must be prime");
  if (k < 1) throw InvalidInput("precision k must be at least 1");
  CoeffDomain d = CoeffDomain::modular(l, k);
  GammaL r{GroupRingElement::identity(g, d), GroupRingElement::identity(g, d), true, true};
  if (f % l == 0) return r;
  if (g->conductor() % l == 0) throw InvalidInput("sigma_l is undefined: l ramifies in F");
  r.empty = false;
  r.factor = euler_factor(g, ipow(Z(l), n), l, d);
  try {
    r.gamma = r.factor.inverse();
  } catch (const InvalidInput&) {
    throw InvalidInput("1 - l^n sigma_l^{-1} is not a unit modulo " + std::to_string(l) + "^" + std::to_string(k));
  }
  r.certified = r.factor * r.gamma == GroupRingElement::identity(g, d);
  return r;
}

RestrictionResult restriction_gamma_check(unsigned n, std::uint64_t b, std::uint64_t f, std::uint64_t l, int k) {
  if (!is_prime_u64(l)) throw InvalidInput("l must be prime");
  if (k < 1) throw InvalidInput("k must be at least 1");
  std::uint64_t lk = 1;
  for (int i = 0; i < k; ++i) lk *= l;
  std::uint64_t me = lcm_u64(f, lk);
  std::uint64_t fstar = f % l == 0 ? f : f * l;
  auto gf = AbelianGaloisGroup::make(f);
  auto ge = AbelianGaloisGroup::make(me);
  auto te = theta(ge, n, b, fstar);
  auto tf = theta(gf, n, b, f);
  RestrictionResult r{false, restrict(te.element, gf), tf.element, std::nullopt, me, fstar};
  if (f % l != 0) r.predicted = tf.element * euler_factor(gf, ipow(Z(l), n), l);
  r.holds = r.restricted == r.predicted;
  if (!r.restricted.non_integral_at(l) && !tf.element.non_integral_at(l) && n >= 1) {
    auto gam = gamma_l(n, f, l, gf, k);
    r.holds_mod = r.restricted.reduce(l, k) * gam.gamma == tf.element.reduce(l, k);
  }
  return r;
}

// ---------------------------------------------------------------------------

InducedModule::InducedModule(GroupPtr g, std::uint64_t p, unsigned n, std::uint64_t l)
    : g_(std::move(g)), p_(p), n_(n), l_(l) {
  if (!is_prime_u64(p) || !is_prime_u64(l)) throw InvalidInput("p and l must be prime");
  if (p == l) throw InvalidInput("the place v must not lie above l");
  if (n < 1) throw InvalidInput("n must be at least 1");
  gv_ = g_->decomposition(p);
  iv_ = g_->inertia(p);
  std::size_t frob = g_->frobenius(p);
  frob_power_.assign(g_->order(), -1);
  // G_v = union of Frob^alpha I_v.
  std::size_t cur = g_->identity();
  std::vector<bool> seen(g_->order(), false);
  for (long alpha = 0;; ++alpha) {
    bool fresh = false;
    for (auto i : iv_) {
      std::size_t h = g_->mul(cur, i);
      if (!seen[h]) {
        seen[h] = true;
        frob_power_[h] = alpha;
        fresh = true;
      }
    }
    if (!fresh) {
      f_ = static_cast<std::size_t>(alpha);
      break;
    }
    cur = g_->mul(cur, frob);
  }
  std::size_t covered = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
  if (covered != gv_.size()) throw InternalInconsistency("decomposition group is not generated by Frobenius and inertia");
  Int qf = ipow(Z(p), static_cast<unsigned long>(f_ * n)) - 1;
  k_ = static_cast<int>(padic_val(qf, l));
  mod_ = ipow(Z(l), static_cast<unsigned long>(k_));
  qpow_.resize(f_);
  for (std::size_t a = 0; a < f_; ++a) qpow_[a] = mod_floor(ipow(Z(p), static_cast<unsigned long>(a * n)), mod_);
  coset_of_.assign(g_->order(), g_->order());
  for (std::size_t s = 0; s < g_->order(); ++s) {
    if (coset_of_[s] != g_->order()) continue;
    std::size_t c = cosets_.size();
    cosets_.push_back(s);
    for (auto h : gv_) coset_of_[g_->mul(s, h)] = c;
  }
}

InducedModule::Element InducedModule::zero() const { return Element(cosets_.size(), Int(0)); }

InducedModule::Element InducedModule::generator() const {
  Element e = zero();
  e[0] = mod_floor(Int(1), mod_);
  return e;
}

InducedModule::Element InducedModule::add(const Element& a, const Element& b) const {
  Element r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = mod_floor(a[i] + b[i], mod_);
  return r;
}

InducedModule::Element InducedModule::act(std::size_t s, const Element& a) const {
  Element r = zero();
  for (std::size_t j = 0; j < cosets_.size(); ++j) {
    if (a[j] == 0) continue;
    std::size_t moved = g_->mul(s, cosets_[j]);
    std::size_t jj = coset_of_[moved];
    // s c_j = c_jj h with h in G_v.
    std::size_t h = g_->mul(g_->inv(cosets_[jj]), moved);
    long alpha = frob_power_[h];
    if (alpha < 0) throw InternalInconsistency("coset bookkeeping failed");
    r[jj] = mod_floor(r[jj] + a[j] * qpow_[static_cast<std::size_t>(alpha)], mod_);
  }
  return r;
}

InducedModule::Element InducedModule::act(const GroupRingElement& x, const Element& a) const {
  if (!same_group(x.group(), g_)) throw InvalidInput("group ring element and module use different groups");
  Element r = zero();
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x.coeff_is_zero(s)) continue;
    Int c;
    if (x.domain().is_rational()) {
      if (k_ == 0) continue;
      if (auto v = padic_val(x.rat(s), l_); v && *v < 0) throw InvalidInput("exponent is not l-integral");
      c = rat_mod_prime_power(x.rat(s), l_, k_);
    } else {
      if (x.domain().l != l_ || x.domain().k < k_) throw InvalidInput("exponent precision is below the fiber order");
      c = x.residue(s);
    }
    Element moved = act(s, a);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = mod_floor(r[j] + c * moved[j], mod_);
  }
  return r;
}

Json InducedModule::to_json(const Element& a) const {
  Json j;
  j["fiber_order"] = mod_.get_str();
  Json coords = Json::array();
  for (std::size_t c = 0; c < cosets_.size(); ++c) {
    coords.push_back({{"coset", std::to_string(g_->rep(cosets_[c]))}, {"value", a[c].get_str()}});
  }
  j["coordinates"] = coords;
  return j;
}

InducedModule::Element boundary_exponent(const InducedModule& mod, const InducedModule::Element& xi,
                                         const GroupRingElement& theta, int vln) {
  if (auto bad = theta.domain().is_rational() ? theta.non_integral_at(mod.l()) : std::nullopt) {
    throw InvalidInput("Theta is not " + std::to_string(mod.l()) + "-integral");
  }
  GroupRingElement e = theta.scaled(Rat(ipow(Z(mod.l()), static_cast<unsigned long>(vln))));
  return mod.act(e, xi);
}

bool frobenius_action_check(const InducedModule& mod, std::optional<long> max_alpha) {
  const auto& g = *mod.group();
  std::size_t frob = g.frobenius(mod.p());
  long top = max_alpha.value_or(static_cast<long>(mod.residue_degree()));
  auto xi = mod.generator();
  std::size_t cur = g.identity();
  Int q = ipow(Z(mod.p()), mod.n());
  for (long alpha = 0; alpha <= top; ++alpha) {
    auto lhs = mod.act(cur, xi);
    Int scale = mod_floor(ipow(q, static_cast<unsigned long>(alpha)), mod.fiber_order());
    InducedModule::Element rhs = xi;
    for (auto& c : rhs) c = mod_floor(c * scale, mod.fiber_order());
    if (lhs != rhs) return false;
    cur = g.mul(cur, frob);
  }
  return true;
}

}  // namespace stickel
