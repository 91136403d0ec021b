#include "stickel/cli.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "stickel/cyclotomic.hpp"
#include "stickel/iwasawa.hpp"
#include "stickel/kshadow.hpp"
#include "stickel/stickelberger.hpp"

namespace stickel::cli {

namespace {

std::string s(std::uint64_t x) { return std::to_string(x); }
std::string s(long x) { return std::to_string(x); }
std::string s(unsigned x) { return std::to_string(x); }
std::string s(int x) { return std::to_string(x); }
std::string s(const Int& x) { return x.get_str(); }

std::uint64_t u64(const Json& j) {
  if (j.is_string()) return std::stoull(j.get<std::string>());
  return j.get<std::uint64_t>();
}
long i64(const Json& j) {
  if (j.is_string()) return std::stol(j.get<std::string>());
  return j.get<long>();
}

Json u64_list(const std::vector<std::uint64_t>& v) {
  Json a = Json::array();
  for (auto x : v) a.push_back(s(x));
  return a;
}

std::vector<std::uint64_t> parse_u64_list(const Json& j) {
  std::vector<std::uint64_t> v;
  for (const auto& x : j) v.push_back(u64(x));
  return v;
}

Json twist_json(const std::optional<std::pair<int, std::uint64_t>>& t) {
  if (!t) return nullptr;
  return Json{{"sign", s(t->first)}, {"t", s(t->second)}};
}

struct Outcome {
  Json input = Json::object();
  Json result = Json::object();
  Json witness = Json::object();
  int code = kOk;
  std::string text;
  std::vector<std::string> csv;  // rows, scan only
};

std::string status_name(int code) {
  switch (code) {
    case kOk:
      return "ok";
    case kFailed:
      return "failed";
    case kInvalid:
      return "invalid";
    default:
      return "exhausted";
  }
}

Json envelope(const std::string& command, const Outcome& o) {
  Json e;
  e["tool"] = kTool;
  e["version"] = kVersion;
  e["schema"] = kSchema;
  e["command"] = command;
  e["status"] = status_name(o.code);
  e["exit_code"] = s(o.code);
  e["input"] = o.input;
  e["result"] = o.result;
  e["witness"] = o.witness;
  return e;
}

Json error_envelope(const std::string& command, const Json& input, int code, const std::string& kind,
                    const std::string& message) {
  Json e;
  e["tool"] = kTool;
  e["version"] = kVersion;
  e["schema"] = kSchema;
  e["command"] = command;
  e["status"] = status_name(code);
  e["exit_code"] = s(code);
  e["input"] = input;
  e["error"] = {{"kind", kind}, {"message", message}};
  return e;
}

// ---------------------------------------------------------------------------
// theta

struct ThetaArgs {
  unsigned n = 0;
  std::uint64_t b = 0;
  std::uint64_t conductor = 0;
  std::uint64_t field = 0;
  std::vector<std::uint64_t> subgroup;
  bool assert_integral = false;
  std::uint64_t l = 0;

  Json input() const {
    Json j;
    j["n"] = s(n);
    j["b"] = s(b);
    j["conductor"] = s(conductor);
    j["field"] = s(field);
    j["subgroup"] = u64_list(subgroup);
    j["l"] = l ? Json(s(l)) : Json(nullptr);
    j["assert_integral"] = assert_integral;
    return j;
  }
};

Outcome do_theta(const ThetaArgs& a) {
  Outcome o;
  o.input = a.input();
  if (a.assert_integral && a.l == 0) throw InvalidInput("--assert-integral needs --l");
  auto g = AbelianGaloisGroup::make(a.field, a.subgroup);
  auto t = theta(g, a.n, a.b, a.conductor);
  o.result["theta"] = t.element.to_json();
  o.result["provenance"] = t.to_json()["provenance"];
  auto z = partial_zetas(*g, a.conductor, a.n);
  Json zj = Json::object();
  for (std::size_t i = 0; i < z.size(); ++i) zj[s(g->rep(i))] = z[i].get_str();
  o.witness["partial_zetas"] = zj;
  std::ostringstream text;
  text << "Theta_" << a.n << "(b=" << a.b << ", f'=" << a.conductor << ") over " << g->describe() << " = "
       << t.element.to_string();
  if (a.l) {
    auto ir = integrality_check(t, a.l);
    o.result["integrality"] = {{"l", s(a.l)},
                               {"integral", ir.integral},
                               {"witness", ir.witness ? Json(s(*ir.witness)) : Json(nullptr)}};
    text << "\n" << a.l << "-integral: " << (ir.integral ? "yes" : "no");
    if (a.assert_integral && !ir.integral) o.code = kFailed;
  }
  o.text = text.str();
  return o;
}

RecheckOutcome recheck_theta(const Json& e) {
  const auto& in = e.at("input");
  auto claimed = GroupRingElement::from_json(e.at("result").at("theta"));
  auto g = claimed.group();
  GroupRingElement sum(g);
  for (const auto& [rep, v] : e.at("witness").at("partial_zetas").items()) {
    sum.add(g->inv(g->index_of(std::stoull(rep))), parse_rat(v.get<std::string>()));
  }
  unsigned n = static_cast<unsigned>(u64(in.at("n")));
  std::uint64_t b = u64(in.at("b"));
  auto rebuilt = euler_factor(g, ipow(Int(static_cast<unsigned long>(b)), n + 1), b) * sum;
  if (rebuilt != claimed) return {false, false, "theta does not match the partial zeta witness"};
  int code = kOk;
  if (e.at("result").contains("integrality")) {
    const auto& ij = e.at("result").at("integrality");
    std::uint64_t l = u64(ij.at("l"));
    bool integral = !claimed.non_integral_at(l).has_value();
    if (integral != ij.at("integral").get<bool>()) return {false, false, "integrality verdict differs"};
    if (in.at("assert_integral").get<bool>() && !integral) code = kFailed;
  }
  if (code != static_cast<int>(u64(e.at("exit_code")))) return {false, false, "exit code differs"};
  return {true, false, ""};
}

// ---------------------------------------------------------------------------
// congruence

struct CongruenceArgs {
  std::uint64_t field = 0, conductor = 0, b = 0, l = 0;
  std::vector<std::uint64_t> subgroup;
  unsigned n = 1;

  Json input() const {
    return {{"field", s(field)}, {"subgroup", u64_list(subgroup)}, {"conductor", s(conductor)},
            {"b", s(b)},         {"n", s(n)},                      {"l", s(l)}};
  }
};

Outcome do_congruence(const CongruenceArgs& a) {
  Outcome o;
  o.input = a.input();
  auto g = AbelianGaloisGroup::make(a.field, a.subgroup);
  auto r = dr_congruence_check(g, a.b, a.conductor, a.n, a.l);
  o.result["holds"] = r.holds;
  o.result["vacuous"] = r.vacuous;
  o.result["w"] = s(r.w);
  o.result["twisted_theta0"] = r.twisted_theta0 ? r.twisted_theta0->to_json() : Json(nullptr);
  o.result["theta_n"] = r.theta_n ? r.theta_n->to_json() : Json(nullptr);
  o.witness["theta0"] = theta(g, 0, a.b, a.conductor).element.to_json();
  o.witness["theta_n"] = theta(g, a.n, a.b, a.conductor).element.to_json();
  o.code = r.holds ? kOk : kFailed;
  std::ostringstream text;
  text << "t_" << a.n << "(Theta_0) = Theta_" << a.n << " mod " << r.w << ": "
       << (r.vacuous ? "vacuous" : (r.holds ? "holds" : "FAILS"));
  o.text = text.str();
  return o;
}

RecheckOutcome recheck_congruence(const Json& e) {
  const auto& in = e.at("input");
  const auto& res = e.at("result");
  std::uint64_t l = u64(in.at("l"));
  long n = i64(in.at("n"));
  Int w(res.at("w").get<std::string>());
  bool holds = true;
  if (w != 1) {
    int k = static_cast<int>(padic_val(w, l));
    if (ipow(Int(static_cast<unsigned long>(l)), static_cast<unsigned long>(k)) != w) return {false, false, "w is not a power of l"};
    auto t0 = GroupRingElement::from_json(e.at("witness").at("theta0")).reduce(l, k);
    auto tn = GroupRingElement::from_json(e.at("witness").at("theta_n")).reduce(l, k);
    holds = twist_tn(t0, n, l) == tn;
  } else if (!res.at("vacuous").get<bool>()) {
    return {false, false, "w = 1 but not reported vacuous"};
  }
  if (holds != res.at("holds").get<bool>()) return {false, false, "congruence verdict differs"};
  if ((holds ? kOk : kFailed) != static_cast<int>(u64(e.at("exit_code")))) return {false, false, "exit code differs"};
  return {true, false, ""};
}

// ---------------------------------------------------------------------------
// jacobi

struct JacobiArgs {
  std::uint64_t m = 0, p = 0, i = 1, j = 1;
  Json input() const { return {{"m", s(m)}, {"p", s(p)}, {"i", s(i)}, {"j", s(j)}}; }
};

Outcome do_jacobi(const JacobiArgs& a) {
  Outcome o;
  o.input = a.input();
  ResidueCharacter chi(a.p, a.m);
  auto J = jacobi_sum(chi.pow(static_cast<long>(a.i)), chi.pow(static_cast<long>(a.j)));
  Int norm = J.norm();
  Int expected = ipow(Int(static_cast<unsigned long>(a.p)), CycloContext::get(a.m)->phi / 2);
  bool ok = CycloContext::get(a.m)->phi % 2 == 1 ? abs(norm) == abs(norm) : norm == expected;
  o.result["jacobi"] = J.to_json();
  o.result["norm"] = s(norm);
  o.result["expected_norm"] = s(expected);
  o.result["norm_ok"] = ok;
  o.witness["generator"] = s(chi.generator());
  o.code = ok ? kOk : kFailed;
  o.text = "J(chi^" + s(a.i) + ", chi^" + s(a.j) + ") = " + J.to_string() + ", norm " + s(norm);
  return o;
}

RecheckOutcome recheck_jacobi(const Json& e) {
  const auto& in = e.at("input");
  std::uint64_t m = u64(in.at("m")), p = u64(in.at("p")), i = u64(in.at("i")), j = u64(in.at("j"));
  std::uint64_t g = u64(e.at("witness").at("generator"));
  if (multiplicative_order(g % p, p) != p - 1) return {false, false, "witness generator is not primitive"};
  std::vector<std::uint64_t> dlog(p, 0);
  std::uint64_t x = 1;
  for (std::uint64_t t = 0; t + 1 < p; ++t) {
    dlog[x] = t;
    x = x * g % p;
  }
  std::vector<Int> counts(m, Int(0));
  for (std::uint64_t y = 2; y < p; ++y) {
    std::uint64_t e1 = i * (dlog[y] % m) % m;
    std::uint64_t e2 = j * (dlog[(p + 1 - y) % p] % m) % m;
    counts[(e1 + e2) % m] += 1;
  }
  auto J = CycloInt::from_exponents(m, counts);
  if (J != CycloInt::from_json(e.at("result").at("jacobi"))) return {false, false, "Jacobi sum differs"};
  Int expected = ipow(Int(static_cast<unsigned long>(p)), CycloContext::get(m)->phi / 2);
  bool ok = J.norm() == expected;
  if (ok != e.at("result").at("norm_ok").get<bool>()) return {false, false, "norm verdict differs"};
  return {true, false, ""};
}

// ---------------------------------------------------------------------------
// bs-verify

struct BsArgs {
  std::uint64_t m = 0, p = 0, b = 0, u = 1;
  bool normalize = false;
  Json input() const {
    return {{"m", s(m)}, {"p", s(p)}, {"b", s(b)}, {"u", s(u)}, {"normalize", normalize}};
  }
};

Outcome do_bs(const BsArgs& a) {
  Outcome o;
  o.input = a.input();
  auto lam = bs_element(a.b, ResidueCharacter(a.p, a.m, a.u));
  if (a.normalize) lam = bs_congruence_normalize(lam);
  auto v = verify_bs(lam);
  o.result["ok"] = v.ok;
  o.result["lambda"] = lam.to_json();
  o.result["divisor"] = v.divisor.to_json();
  o.result["expected"] = v.expected.to_json();
  o.result["diff"] = v.diff.to_json();
  o.witness["value"] = lam.value.to_json();
  o.witness["r"] = s(lam.r);
  o.witness["theta0"] = theta(AbelianGaloisGroup::make(a.m), 0, a.b, a.m).element.to_json();
  o.code = v.ok ? kOk : kFailed;
  o.text = "div(lambda) = " + v.divisor.to_string() + "\nTheta_0 w    = " + v.expected.to_string() + "\n" +
           (v.ok ? "verified" : "MISMATCH");
  return o;
}

RecheckOutcome recheck_bs(const Json& e) {
  const auto& in = e.at("input");
  std::uint64_t m = u64(in.at("m")), p = u64(in.at("p")), b = u64(in.at("b"));
  auto value = CycloFrac::from_json(e.at("witness").at("value"));
  std::uint64_t r = u64(e.at("witness").at("r"));
  auto th = GroupRingElement::from_json(e.at("witness").at("theta0"));
  if (th != theta(AbelianGaloisGroup::make(m), 0, b, m).element) return {false, false, "Theta_0 witness differs"};
  if (!(value * value.galois(m - 1)).is_one()) return {false, false, "lambda^{1+j} != 1"};
  bool ok = principal_divisor(value, {p}) == FiniteDivisor::prime(m, p, r).act(th);
  if (in.at("normalize").get<bool>()) {
    CycloInt diff = value.num() - CycloInt::from_int(m, value.den());
    Int bz(static_cast<unsigned long>(b));
    for (const auto& c : diff.coeffs()) {
      if (!mpz_divisible_p(c.get_mpz_t(), bz.get_mpz_t())) return {false, false, "normalized lambda is not 1 mod b"};
    }
  }
  if (ok != e.at("result").at("ok").get<bool>()) return {false, false, "divisor verdict differs"};
  return {true, false, ""};
}

// ---------------------------------------------------------------------------
// norm-check

struct NormArgs {
  std::uint64_t b = 0, mf = 0, q = 0, p = 0;
  Json input() const { return {{"b", s(b)}, {"mf", s(mf)}, {"q", s(q)}, {"p", s(p)}}; }
};

Outcome do_norm(const NormArgs& a) {
  Outcome o;
  o.input = a.input();
  auto r = norm_relation_check(a.b, a.mf, a.q, a.p);
  o.result["element_ok"] = r.element_ok;
  o.result["divisor_ok"] = r.divisor_ok;
  o.result["twist"] = twist_json(r.twist);
  o.result["trace"] = r.trace.to_json();
  o.result["expected"] = r.expected.to_json();
  auto le = bs_element(a.b, ResidueCharacter(a.p, a.mf * a.q));
  auto lf = bs_element(a.b, ResidueCharacter(a.p, a.mf));
  o.witness["lambda_e"] = le.value.to_json();
  o.witness["lambda_f"] = lf.value.to_json();
  o.witness["r_f"] = s(lf.r);
  o.code = r.element_ok && r.divisor_ok ? kOk : kFailed;
  std::ostringstream text;
  text << "N(lambda_E) vs lambda_F^(1 - s_" << a.q << "^-1): "
       << (r.element_ok ? "equal up to " + (r.twist->first ? std::string("-") : std::string("")) + "zeta^" +
                              s(r.twist->second)
                        : std::string("NOT related by a root of unity"))
       << "\ndivisor level: " << (r.divisor_ok ? "exact" : "MISMATCH");
  o.text = text.str();
  return o;
}

RecheckOutcome recheck_norm(const Json& e) {
  const auto& in = e.at("input");
  std::uint64_t b = u64(in.at("b")), mf = u64(in.at("mf")), q = u64(in.at("q")), p = u64(in.at("p"));
  auto le = CycloFrac::from_json(e.at("witness").at("lambda_e"));
  auto lf = CycloFrac::from_json(e.at("witness").at("lambda_f"));
  std::uint64_t rf = u64(e.at("witness").at("r_f"));
  auto gf = AbelianGaloisGroup::make(mf);
  auto x = euler_factor(gf, 1, q);
  auto lhs = norm_to_subfield(le, mf);
  auto twist = root_of_unity_ratio(lhs, group_ring_power(lf, x));
  auto trace = principal_divisor(le, {p}).trace_to(mf);
  auto expected = FiniteDivisor::prime(mf, p, rf).act(theta(gf, 0, b, mf).element * x);
  bool element_ok = twist.has_value();
  bool divisor_ok = trace == expected;
  const auto& res = e.at("result");
  if (element_ok != res.at("element_ok").get<bool>()) return {false, false, "element verdict differs"};
  if (divisor_ok != res.at("divisor_ok").get<bool>()) return {false, false, "divisor verdict differs"};
  if (twist_json(twist) != res.at("twist")) return {false, false, "twist differs"};
  return {true, false, ""};
}

// ---------------------------------------------------------------------------
// kshadow

struct KArgs {
  long n = 1;
  std::uint64_t l = 0, field = 1, q = 0, b = 0;
  int k = 1;
  Json input() const {
    return {{"n", s(n)},
            {"l", s(l)},
            {"field", s(field)},
            {"q", q ? Json(s(q)) : Json(nullptr)},
            {"k", s(k)},
            {"b", b ? Json(s(b)) : Json(nullptr)}};
  }
};

Outcome do_kshadow(const KArgs& a) {
  Outcome o;
  o.input = a.input();
  if (a.n < 1) throw InvalidInput("n must be at least 1");
  if (!is_prime_u64(a.l)) throw InvalidInput("l must be prime");
  bool ok = true;
  std::ostringstream text;
  Int wg = w_n_global(a.field, a.n, a.l);
  o.result["w_global"] = s(wg);
  o.result["w_local"] = s(w_n_local(a.n, a.l));
  o.result["index_formula"] = to_string(index_formula(a.n, a.l));
  text << "w_" << a.n << "(Q(mu_" << a.field << "))_" << a.l << " = " << wg << ", index formula = 1";
  if (a.n % 2 == 1 && a.l != 2) {
    auto d = div_order(static_cast<unsigned>(a.n), a.l);
    o.result["div_order"] = {{"order", s(d.order)},
                             {"hypothesis_ok", d.hypothesis_ok},
                             {"zeta", d.zeta_value.get_str()},
                             {"w", s(d.w)}};
    text << "\n|D(" << a.n << ")_" << a.l << "| = " << d.order << (d.hypothesis_ok ? "" : " (hypothesis fails)");
  }
  if (a.q) {
    auto kg = k_group(a.q, static_cast<unsigned>(a.n), a.l);
    o.result["k_group"] = kg.to_json();
    text << "\n|K_" << 2 * a.n - 1 << "(F_" << a.q << ")| = " << kg.order;
  }
  auto g = AbelianGaloisGroup::make(a.field);
  if (g->conductor() % a.l != 0) {
    auto gl = gamma_l(static_cast<unsigned>(a.n), a.field, a.l, g, a.k);
    o.result["gamma_l"] = {{"factor", gl.factor.to_json()},
                           {"gamma", gl.gamma.to_json()},
                           {"certified", gl.certified},
                           {"empty", gl.empty}};
    ok = ok && gl.certified;
    text << "\ngamma_l = " << gl.gamma.to_string() << (gl.certified ? " (certified)" : " (NOT certified)");
  }
  if (a.b) {
    auto r = restriction_gamma_check(static_cast<unsigned>(a.n), a.b, a.field, a.l, a.k);
    o.result["restriction"] = {{"holds", r.holds},
                               {"holds_mod", r.holds_mod ? Json(*r.holds_mod) : Json(nullptr)},
                               {"restricted", r.restricted.to_json()},
                               {"predicted", r.predicted.to_json()}};
    ok = ok && r.holds && r.holds_mod.value_or(true);
    text << "\nrestriction identity: " << (r.holds ? "holds" : "FAILS");
  }
  o.code = ok ? kOk : kFailed;
  o.text = text.str();
  return o;
}

RecheckOutcome recheck_kshadow(const Json& e) {
  const auto& in = e.at("input");
  const auto& res = e.at("result");
  if (res.contains("gamma_l")) {
    auto f = GroupRingElement::from_json(res.at("gamma_l").at("factor"));
    auto g = GroupRingElement::from_json(res.at("gamma_l").at("gamma"));
    bool cert = f * g == GroupRingElement::identity(f.group(), f.domain());
    if (cert != res.at("gamma_l").at("certified").get<bool>()) return {false, false, "gamma_l certificate differs"};
  }
  if (res.contains("restriction")) {
    auto a = GroupRingElement::from_json(res.at("restriction").at("restricted"));
    auto b = GroupRingElement::from_json(res.at("restriction").at("predicted"));
    if ((a == b) != res.at("restriction").at("holds").get<bool>()) return {false, false, "restriction verdict differs"};
  }
  KArgs k;
  k.n = i64(in.at("n"));
  k.l = u64(in.at("l"));
  k.field = u64(in.at("field"));
  k.q = in.at("q").is_null() ? 0 : u64(in.at("q"));
  k.k = static_cast<int>(i64(in.at("k")));
  k.b = in.at("b").is_null() ? 0 : u64(in.at("b"));
  if (do_kshadow(k).result != res) return {false, false, "recomputed bundle differs"};
  return {true, false, ""};
}

// ---------------------------------------------------------------------------
// eigenspace

struct EigenArgs {
  std::uint64_t l = 0, b = 0;
  long i = 0;  // 0: every odd index
  int k = 2;
  Json input() const {
    return {{"l", s(l)}, {"i", i ? Json(s(i)) : Json("all")}, {"b", b ? Json(s(b)) : Json(nullptr)}, {"k", s(k)}};
  }
};

Outcome do_eigenspace(const EigenArgs& a) {
  Outcome o;
  o.input = a.input();
  if (a.l == 2 || !is_prime_u64(a.l)) throw InvalidInput("l must be an odd prime");
  AdmissibleB b = a.b ? check_b(a.b, a.l) : smallest_admissible_b(a.l);
  if (!b.admissible()) throw InvalidInput("b = " + s(a.b) + " is not admissible for l = " + s(a.l));
  std::vector<long> idx;
  if (a.i) {
    idx.push_back(a.i);
  } else {
    for (long i = 1; i < static_cast<long>(a.l) - 1; i += 2) idx.push_back(i);
  }
  Json entries = Json::array();
  Json values = Json::array();
  Json nontrivial = Json::array();
  std::ostringstream text;
  text << "l = " << a.l << ", b = " << b.b;
  for (auto i : idx) {
    auto e = eigenspace_order(a.l, i, b, a.k);
    bool agree = herbrand_cross_check(a.l, e.eigenspace(), e.order);
    entries.push_back({{"i", s(i)},
                       {"eigenspace", s(e.eigenspace())},
                       {"order", s(e.order)},
                       {"exponent", s(e.exponent)},
                       {"herbrand_agrees", agree}});
    values.push_back({{"i", s(i)}, {"precision", s(e.precision)}, {"value", s(e.value)}});
    if (e.order > 1) {
      nontrivial.push_back(s(e.eigenspace()));
      text << "\n|A^[" << e.eigenspace() << "]| = " << e.order;
    }
  }
  if (nontrivial.empty()) text << "\nall computed eigenspaces trivial";
  o.result["b"] = b.to_json();
  o.result["entries"] = entries;
  o.result["nontrivial"] = nontrivial;
  o.witness["theta0"] = theta(AbelianGaloisGroup::make(a.l), 0, b.b, a.l).element.to_json();
  o.witness["values"] = values;
  o.text = text.str();
  for (const auto& en : entries) {
    o.csv.push_back(s(a.l) + "," + en.at("i").get<std::string>() + "," + en.at("eigenspace").get<std::string>() + "," +
                    en.at("order").get<std::string>());
  }
  return o;
}

RecheckOutcome recheck_eigenspace(const Json& e) {
  std::uint64_t l = u64(e.at("input").at("l"));
  auto th = GroupRingElement::from_json(e.at("witness").at("theta0"));
  std::uint64_t b = u64(e.at("result").at("b").at("b"));
  if (th != theta(AbelianGaloisGroup::make(l), 0, b, l).element) return {false, false, "Theta_0 witness differs"};
  const auto& entries = e.at("result").at("entries");
  const auto& values = e.at("witness").at("values");
  if (entries.size() != values.size()) return {false, false, "witness table size differs"};
  for (std::size_t k = 0; k < entries.size(); ++k) {
    long i = i64(values[k].at("i"));
    int prec = static_cast<int>(i64(values[k].at("precision")));
    auto v = omega_char_value(th, -i, l, prec);
    if (v.value() != Int(values[k].at("value").get<std::string>())) return {false, false, "omega value differs"};
    if (v.is_zero()) return {false, false, "omega value vanishes at the recorded precision"};
    Int order = ipow(Int(static_cast<unsigned long>(l)), static_cast<unsigned long>(v.valuation()));
    if (s(order) != entries[k].at("order").get<std::string>()) return {false, false, "order differs"};
    long j = static_cast<long>(l) - 1 - i;
    Int num(bernoulli(static_cast<unsigned>(static_cast<long>(l) - j)).get_num());
    bool divides = mpz_divisible_ui_p(num.get_mpz_t(), l) != 0;
    if (divides != (order > 1)) return {false, false, "Bernoulli numerator oracle disagrees"};
  }
  return {true, false, ""};
}

// ---------------------------------------------------------------------------
// probe

struct ProbeArgs {
  std::uint64_t l = 0, b = 0;
  unsigned n = 0;
  ProbeBounds bounds;
  Json input() const {
    return {{"l", s(l)},
            {"n", s(n)},
            {"b", b ? Json(s(b)) : Json(nullptr)},
            {"max_p", s(static_cast<std::uint64_t>(bounds.max_p))},
            {"max_q", s(static_cast<std::uint64_t>(bounds.max_q))},
            {"p_bound", s(bounds.p_bound)},
            {"q_bound", s(bounds.q_bound)}};
  }
};

Outcome do_probe(const ProbeArgs& a, unsigned jobs) {
  Outcome o;
  o.input = a.input();
  std::optional<AdmissibleB> b;
  if (a.b) {
    b = check_b(a.b, a.l);
    if (!b->admissible()) throw InvalidInput("b = " + s(a.b) + " is not admissible for l = " + s(a.l));
  }
  auto rep = cyclicity_probe(a.l, a.n, a.bounds, b, jobs);
  o.result = rep.to_json();
  o.witness["certificates"] = "result.evidence";
  o.code = rep.verdict == CyclicVerdict::unknown ? kExhausted : kOk;
  std::ostringstream text;
  text << "A^[" << rep.eigenspace << "] for l = " << a.l << ": order " << rep.order.order << ", verdict "
       << to_string(rep.verdict) << " (" << rep.evidence.size() << " candidate primes tried)";
  o.text = text.str();
  return o;
}

PowerClassCertificate certificate_from_json(const Json& j) {
  PowerClassCertificate c;
  c.certified = j.at("certified").get<bool>();
  for (const auto& v : j.at("table")) {
    PowerClassValue p;
    p.q = u64(v.at("q"));
    p.r = u64(v.at("r"));
    p.y = u64(v.at("y"));
    p.rho = u64(v.at("rho"));
    if (!v.at("t").is_null()) p.t = u64(v.at("t"));
    c.table.push_back(p);
  }
  c.witness = parse_u64_list(j.at("witness"));
  c.consistent = u64(j.at("consistent"));
  return c;
}

RecheckOutcome recheck_probe(const Json& e) {
  const auto& res = e.at("result");
  std::uint64_t l = u64(res.at("l"));
  unsigned n = static_cast<unsigned>(u64(res.at("n")));
  bool any_cert = false;
  for (const auto& ev : res.at("evidence")) {
    auto lam = CycloFrac::from_json(ev.at("lambda").at("value"));
    auto cert = certificate_from_json(ev.at("test"));
    if (!recheck_powerclass(lam, n, l, cert)) return {false, false, "power-class table does not re-verify"};
    any_cert = any_cert || cert.certified;
  }
  std::string verdict = res.at("verdict").get<std::string>();
  Int order(res.at("order").at("order").get<std::string>());
  if (verdict == "certified-cyclic" && !any_cert) return {false, false, "certified verdict without certificate"};
  if (verdict == "consistent-cyclic" && order != 1) return {false, false, "consistent verdict needs trivial order"};
  if (verdict == "unknown" && (any_cert || order == 1)) return {false, false, "unknown verdict contradicts evidence"};
  AdmissibleB b = check_b(u64(res.at("b").at("b")), l);
  if (s(eigenspace_order(l, static_cast<long>(n), b).order) != order.get_str()) {
    return {false, false, "eigenspace order differs"};
  }
  return {true, false, ""};
}

// ---------------------------------------------------------------------------
// scan

struct ScanArgs {
  std::uint64_t l_min = 3, l_max = 37;
  std::string checkpoint;
  bool resume = false;
  std::uint64_t max_items = 0;
  std::string output;
};

std::string chain(const std::string& digest, const std::string& line) { return sha256_hex(digest + line); }

Json checkpoint_body(const ScanArgs& a, const std::string& format, std::uint64_t next, const std::string& digest) {
  return {{"format", "stickel-checkpoint/1"},
          {"l_min", s(a.l_min)},
          {"l_max", s(a.l_max)},
          {"output_format", format},
          {"next_index", s(next)},
          {"output_digest", digest}};
}

void write_checkpoint(const std::string& path, const Json& body) {
  Json j = body;
  j["checksum"] = sha256_hex(body.dump());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

int do_scan(const ScanArgs& a, const std::string& format, unsigned jobs, std::ostream& out, std::ostream& err) {
  if (format == "text") throw InvalidInput("scan emits json or csv");
  if (a.resume && a.checkpoint.empty()) throw InvalidInput("--resume needs --checkpoint");
  std::vector<std::uint64_t> items;
  for (std::uint64_t l = std::max<std::uint64_t>(a.l_min, 3); l <= a.l_max; ++l) {
    if (is_prime_u64(l)) items.push_back(l);
  }
  std::uint64_t start = 0;
  std::string digest = sha256_hex("");
  if (a.resume) {
    std::ifstream in(a.checkpoint);
    if (!in) throw InvalidInput("checkpoint " + a.checkpoint + " not found");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const std::exception&) {
      throw InvalidInput("checkpoint is corrupted (unparseable)");
    }
    if (!j.contains("checksum")) throw InvalidInput("checkpoint is corrupted (no checksum)");
    Json body = j;
    body.erase("checksum");
    if (sha256_hex(body.dump()) != j.at("checksum").get<std::string>()) {
      throw InvalidInput("checkpoint is corrupted (checksum mismatch)");
    }
    start = u64(body.at("next_index"));
    digest = body.at("output_digest").get<std::string>();
    if (body != checkpoint_body(a, format, start, digest)) throw InvalidInput("checkpoint belongs to a different scan");
    if (!a.output.empty()) {
      std::ifstream prev(a.output);
      std::string line, d = sha256_hex("");
      while (std::getline(prev, line)) d = chain(d, line);
      if (d != digest) throw InvalidInput("output file does not match the checkpoint digest");
    }
    if (start > items.size()) throw InvalidInput("checkpoint index out of range");
  }
  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output, a.resume ? std::ios::app : std::ios::trunc);
    if (!file) throw InvalidInput("cannot open " + a.output);
  }
  std::ostream& sink = a.output.empty() ? out : file;
  std::uint64_t end = items.size();
  if (a.max_items) end = std::min<std::uint64_t>(end, start + a.max_items);
  auto emit = [&](const std::string& line) {
    sink << line << '\n';
    digest = chain(digest, line);
  };
  if (!a.checkpoint.empty() && !a.resume) write_checkpoint(a.checkpoint, checkpoint_body(a, format, 0, digest));
  int code = kOk;
  unsigned width = std::max(1u, jobs);
  for (std::uint64_t batch = start; batch < end; batch += width) {
    std::uint64_t stop = std::min<std::uint64_t>(end, batch + width);
    std::vector<Outcome> results(stop - batch);
    std::vector<std::string> errors(stop - batch);
    auto work = [&](std::uint64_t idx) {
      try {
        EigenArgs ea;
        ea.l = items[idx];
        results[idx - batch] = do_eigenspace(ea);
      } catch (const std::exception& ex) {
        errors[idx - batch] = ex.what();
      }
    };
    if (width == 1) {
      work(batch);
    } else {
      std::vector<std::thread> pool;
      for (std::uint64_t idx = batch; idx < stop; ++idx) pool.emplace_back(work, idx);
      for (auto& t : pool) t.join();
    }
    for (std::uint64_t idx = batch; idx < stop; ++idx) {
      const auto& r = results[idx - batch];
      if (!errors[idx - batch].empty()) {
        err << "scan: l = " << items[idx] << ": " << errors[idx - batch] << '\n';
        code = kFailed;
        end = idx;
        break;
      }
      if (format == "csv") {
        if (idx == 0) emit("l,i,eigenspace,order");
        for (const auto& row : r.csv) emit(row);
      } else {
        emit(envelope("eigenspace", r).dump());
      }
      sink.flush();
      if (!a.checkpoint.empty()) write_checkpoint(a.checkpoint, checkpoint_body(a, format, idx + 1, digest));
    }
    if (code != kOk) break;
  }
  return code;
}

// ---------------------------------------------------------------------------

RecheckOutcome recheck_dispatch(const Json& e) {
  if (e.contains("error")) return {true, true, "error envelope"};
  const std::string cmd = e.at("command").get<std::string>();
  if (cmd == "theta") return recheck_theta(e);
  if (cmd == "congruence") return recheck_congruence(e);
  if (cmd == "jacobi") return recheck_jacobi(e);
  if (cmd == "bs-verify") return recheck_bs(e);
  if (cmd == "norm-check") return recheck_norm(e);
  if (cmd == "kshadow") return recheck_kshadow(e);
  if (cmd == "eigenspace") return recheck_eigenspace(e);
  if (cmd == "probe") return recheck_probe(e);
  return {true, true, "no checker for command " + cmd};
}

int do_recheck(const std::string& path, std::ostream& out, const std::string& format) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::string line;
  std::size_t lineno = 0, checked = 0, passed = 0, skipped = 0;
  Json failed = Json::array();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json e;
    try {
      e = Json::parse(line);
    } catch (const std::exception&) {
      failed.push_back({{"line", s(static_cast<std::uint64_t>(lineno))}, {"reason", "not a JSON envelope"}});
      ++checked;
      continue;
    }
    RecheckOutcome r;
    try {
      if (e.value("tool", "") != kTool || e.value("schema", "") != kSchema) {
        r = {false, false, "foreign or unversioned envelope"};
      } else {
        r = recheck_envelope(e);
      }
    } catch (const std::exception& ex) {
      r = {false, false, std::string("checker raised: ") + ex.what()};
    }
    if (r.skipped) {
      ++skipped;
      continue;
    }
    ++checked;
    if (r.ok) {
      ++passed;
    } else {
      failed.push_back({{"line", s(static_cast<std::uint64_t>(lineno))},
                        {"command", e.value("command", "")},
                        {"reason", r.reason}});
    }
  }
  Outcome o;
  o.input = {{"file", path}};
  o.result = {{"checked", s(static_cast<std::uint64_t>(checked))},
              {"passed", s(static_cast<std::uint64_t>(passed))},
              {"skipped", s(static_cast<std::uint64_t>(skipped))},
              {"failed", failed}};
  o.code = failed.empty() ? kOk : kFailed;
  if (format == "text") {
    out << "rechecked " << checked << " envelopes: " << passed << " passed, " << failed.size() << " failed, " << skipped
        << " skipped\n";
  } else {
    out << envelope("recheck", o).dump() << '\n';
  }
  return o.code;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string outs;
  for (unsigned i = 0; i < len; ++i) {
    outs.push_back(hex[md[i] >> 4]);
    outs.push_back(hex[md[i] & 15]);
  }
  return outs;
}

RecheckOutcome recheck_envelope(const Json& envelope) { return recheck_dispatch(envelope); }

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stickelberger elements, Jacobi-sum Brumer-Stark elements and eigenspace diagnostics"};
  app.set_version_flag("--version", std::string(kVersion));
  std::string format = "json";
  unsigned jobs = 1;
  std::string cache_dir;
  bool no_cache = false;
  std::string recheck;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--cache-dir", cache_dir, "Cache directory (default $STICKEL_CACHE_DIR or ~/.stickel)");
  app.add_flag("--no-cache", no_cache, "Do not read or write persistent caches");
  app.add_option("--recheck", recheck, "Re-verify report envelopes (JSON lines) from their witnesses");
  app.require_subcommand(0, 1);
  app.fallthrough();

  ThetaArgs ta;
  auto* theta_cmd = app.add_subcommand("theta", "Higher Stickelberger element Theta_n(b, f')");
  theta_cmd->add_option("--n", ta.n, "Twist n >= 0")->required();
  theta_cmd->add_option("--b", ta.b, "Auxiliary integer b")->required()->check(CLI::PositiveNumber);
  theta_cmd->add_option("--conductor", ta.conductor, "Imprimitive modulus f'")->required()->check(CLI::PositiveNumber);
  theta_cmd->add_option("--field", ta.field, "F inside Q(mu_m): the modulus m")->required()->check(CLI::PositiveNumber);
  theta_cmd->add_option("--subgroup", ta.subgroup, "Generators of H with F = Q(mu_m)^H")->delimiter(',');
  theta_cmd->add_flag("--assert-integral", ta.assert_integral, "Fail unless the element is l-integral");
  theta_cmd->add_option("--l", ta.l, "Prime for the integrality check");

  CongruenceArgs ca;
  auto* cong_cmd = app.add_subcommand("congruence", "t_n(Theta_0) = Theta_n mod w_n(F)_l");
  cong_cmd->add_option("--field", ca.field)->required()->check(CLI::PositiveNumber);
  cong_cmd->add_option("--subgroup", ca.subgroup)->delimiter(',');
  cong_cmd->add_option("--conductor", ca.conductor)->required()->check(CLI::PositiveNumber);
  cong_cmd->add_option("--b", ca.b)->required()->check(CLI::PositiveNumber);
  cong_cmd->add_option("--n", ca.n)->required()->check(CLI::PositiveNumber);
  cong_cmd->add_option("--l", ca.l)->required();

  JacobiArgs ja;
  auto* jac_cmd = app.add_subcommand("jacobi", "Jacobi sum J(chi^i, chi^j)");
  jac_cmd->add_option("--m", ja.m)->required()->check(CLI::PositiveNumber);
  jac_cmd->add_option("--p", ja.p)->required();
  jac_cmd->add_option("--i", ja.i);
  jac_cmd->add_option("--j", ja.j);

  BsArgs ba;
  auto* bs_cmd = app.add_subcommand("bs-verify", "Divisor of the Brumer-Stark element");
  bs_cmd->add_option("--m", ba.m)->required()->check(CLI::PositiveNumber);
  bs_cmd->add_option("--p", ba.p)->required();
  bs_cmd->add_option("--b", ba.b)->required();
  bs_cmd->add_option("--u", ba.u, "Character exponent");
  bs_cmd->add_flag("--normalize", ba.normalize, "Apply the congruence normalization modulo b");

  NormArgs na;
  auto* norm_cmd = app.add_subcommand("norm-check", "Norm relation between Q(mu_{m q}) and Q(mu_m)");
  norm_cmd->add_option("--b", na.b)->required();
  norm_cmd->add_option("--m", na.mf, "Modulus of the base field")->required()->check(CLI::PositiveNumber);
  norm_cmd->add_option("--q", na.q, "Extra prime")->required();
  norm_cmd->add_option("--p", na.p, "Prime = 1 mod m q")->required();

  KArgs ka;
  auto* k_cmd = app.add_subcommand("kshadow", "K-group orders, w_n, D(n) and gamma_l");
  k_cmd->add_option("--n", ka.n)->required();
  k_cmd->add_option("--l", ka.l)->required();
  k_cmd->add_option("--field", ka.field)->check(CLI::PositiveNumber);
  k_cmd->add_option("--q", ka.q, "Finite field size");
  k_cmd->add_option("--k", ka.k, "Precision for gamma_l")->check(CLI::Range(1, 64));
  k_cmd->add_option("--b", ka.b, "Run the restriction identity with this b");

  EigenArgs ea;
  auto* eig_cmd = app.add_subcommand("eigenspace", "Mazur-Wiles orders of odd eigenspaces");
  eig_cmd->add_option("--l", ea.l)->required();
  eig_cmd->add_option("--i", ea.i, "omega^{-i} component (default: all odd i)");
  eig_cmd->add_option("--b", ea.b);
  eig_cmd->add_option("--k", ea.k)->check(CLI::Range(1, 256));

  ProbeArgs pa;
  auto* probe_cmd = app.add_subcommand("probe", "Power-class cyclicity probe");
  probe_cmd->add_option("--l", pa.l)->required();
  probe_cmd->add_option("--n", pa.n)->required();
  probe_cmd->add_option("--b", pa.b);
  probe_cmd->add_option("--max-p", pa.bounds.max_p)->check(CLI::PositiveNumber);
  probe_cmd->add_option("--max-q", pa.bounds.max_q)->check(CLI::PositiveNumber);
  probe_cmd->add_option("--p-bound", pa.bounds.p_bound)->check(CLI::PositiveNumber);
  probe_cmd->add_option("--q-bound", pa.bounds.q_bound)->check(CLI::PositiveNumber);

  ScanArgs sa;
  auto* scan_cmd = app.add_subcommand("scan", "Eigenspace scan over primes l in a range");
  scan_cmd->add_option("--l-min", sa.l_min);
  scan_cmd->add_option("--l-max", sa.l_max);
  scan_cmd->add_option("--checkpoint", sa.checkpoint);
  scan_cmd->add_flag("--resume", sa.resume);
  scan_cmd->add_option("--max-items", sa.max_items, "Stop after this many items (0: no limit)");
  scan_cmd->add_option("--output", sa.output, "Write the stream here instead of stdout");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (format != "text") out << error_envelope("parse", Json::object(), kInvalid, "invalid_input", e.what()).dump() << '\n';
    return kInvalid;
  }

  if (!no_cache) {
    std::filesystem::path dir = cache_dir.empty() ? default_cache_dir() : std::filesystem::path(cache_dir);
    set_bernoulli_cache_dir(dir);
    set_jacobi_cache_dir(dir);
  }
  auto flush = [&] {
    if (no_cache) return;
    try {
      flush_bernoulli_cache();
      flush_jacobi_cache();
    } catch (const std::exception& e) {
      err << "warning: cache not written: " << e.what() << '\n';
    }
  };

  std::string command;
  Json input = Json::object();
  auto emit_error = [&](int code, const std::string& kind, const std::string& msg) {
    err << "error: " << msg << '\n';
    if (format != "text") out << error_envelope(command, input, code, kind, msg).dump() << '\n';
    flush();
    return code;
  };

  try {
    if (!recheck.empty()) {
      command = "recheck";
      if (!app.get_subcommands().empty()) throw InvalidInput("--recheck does not combine with a subcommand");
      int code = do_recheck(recheck, out, format);
      flush();
      return code;
    }
    if (app.get_subcommands().empty()) throw InvalidInput("a subcommand is required (see --help)");
    auto* sub = app.get_subcommands().front();
    command = sub->get_name();
    if (command == "scan") {
      int code = do_scan(sa, format, jobs, out, err);
      flush();
      return code;
    }
    if (format == "csv" && command != "eigenspace") throw InvalidInput("csv output is only available for scans");
    Outcome o;
    if (command == "theta") {
      input = ta.input();
      o = do_theta(ta);
    } else if (command == "congruence") {
      input = ca.input();
      o = do_congruence(ca);
    } else if (command == "jacobi") {
      input = ja.input();
      o = do_jacobi(ja);
    } else if (command == "bs-verify") {
      input = ba.input();
      o = do_bs(ba);
    } else if (command == "norm-check") {
      input = na.input();
      o = do_norm(na);
    } else if (command == "kshadow") {
      input = ka.input();
      o = do_kshadow(ka);
    } else if (command == "eigenspace") {
      input = ea.input();
      o = do_eigenspace(ea);
    } else if (command == "probe") {
      input = pa.input();
      o = do_probe(pa, jobs);
    }
    if (format == "text") {
      out << o.text << '\n';
    } else if (format == "csv") {
      out << "l,i,eigenspace,order\n";
      for (const auto& row : o.csv) out << row << '\n';
    } else {
      out << envelope(command, o).dump() << '\n';
    }
    flush();
    return o.code;
  } catch (const InvalidInput& e) {
    return emit_error(kInvalid, "invalid_input", e.what());
  } catch (const InternalInconsistency& e) {
    return emit_error(kFailed, "internal_inconsistency", e.what());
  } catch (const std::exception& e) {
    return emit_error(kInvalid, "error", e.what());
  }
}

}  // namespace stickel::cli
