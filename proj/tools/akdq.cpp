#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "akdq/chart_io.hpp"
#include "akdq/expr.hpp"
#include "akdq/fedosov.hpp"
#include "json.hpp"

using namespace akdq;
using nlohmann::json;

namespace {

// Exit codes: 0 pass, 1 check failure, 2 input error, 3 internal inconsistency.
int exit_code_for(errc k) {
  switch (k) {
    case errc::internal_consistency:
      return 3;
    case errc::invalid_geometry:
      return 1;
    default:
      return 2;
  }
}

struct Emitter {
  bool as_json = false;
  json doc = json::object();

  void kv(const std::string& key, const std::string& value) {
    doc[key] = value;
    if (!as_json) std::cout << key << ": " << value << "\n";
  }
  void check_line(const std::string& name, bool pass, const std::string& witness) {
    doc["checks"].push_back({{"name", name}, {"pass", pass}, {"witness", witness}});
    if (!as_json)
      std::cout << (pass ? "PASS " : "FAIL ") << name
                << (witness.empty() ? "" : "  [" + witness + "]") << "\n";
  }
  void flush() {
    if (as_json) std::cout << doc.dump(2) << "\n";
  }
};

json tensor3_json(const JetTensor& t, int dim) {
  json out = json::object();
  for (int a = 1; a <= dim; ++a)
    for (int b = 1; b <= dim; ++b)
      for (int c = 1; c <= dim; ++c) {
        const Jet& e = t.at({a, b, c});
        if (!e.is_zero())
          out[std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c)] =
              e.to_string();
      }
  return out;
}

json tensor4_json(const JetTensor& t, int dim) {
  json out = json::object();
  for (int a = 1; a <= dim; ++a)
    for (int b = 1; b <= dim; ++b)
      for (int c = 1; c <= dim; ++c)
        for (int d = 1; d <= dim; ++d) {
          const Jet& e = t.at({a, b, c, d});
          if (!e.is_zero())
            out[std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + "," +
                std::to_string(d)] = e.to_string();
        }
  return out;
}

json matrix_json(const JetMatrix& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c).to_string());
    out.push_back(row);
  }
  return out;
}

void print_json_block(Emitter& em, const std::string& key, const json& j) {
  em.doc[key] = j;
  if (!em.as_json) std::cout << key << ": " << j.dump() << "\n";
}

int cmd_check(const std::string& path, Emitter& em) {
  ChartGeometry c = load_chart(path);
  em.kv("chart", c.name);
  ValidationReport rep = validate_chart(c);
  bool ok = rep.all_pass();
  for (auto& ch : rep.checks) em.check_line(ch.name, ch.pass, ch.witness);
  if (ok) {
    DerivedGeometry d = derive_all(c);  // throws with witness on failure
    em.check_line("connection_and_curvature_postconditions", true, "");
    em.kv("nijenhuis", d.N.is_reliably_zero() ? "zero (integrable chart)" : "nonzero");
  }
  em.kv("verdict", ok ? "pass" : "fail");
  em.flush();
  return ok ? 0 : 1;
}

int cmd_connection(const std::string& path, Emitter& em) {
  ChartGeometry c = load_chart(path);
  DerivedGeometry d = derive_all(c);
  em.kv("chart", c.name);
  print_json_block(em, "Gamma", tensor3_json(d.Gamma, c.dim));
  print_json_block(em, "T", tensor3_json(d.T, c.dim));
  print_json_block(em, "N", tensor3_json(d.N, c.dim));
  print_json_block(em, "R", tensor4_json(d.R, c.dim));
  print_json_block(em, "gamma", matrix_json(d.gamma_form.comp));
  json mu = json::array();
  for (auto& m : d.mu_form) mu.push_back(m.to_string());
  print_json_block(em, "mu", mu);
  em.flush();
  return 0;
}

int cmd_star(const std::string& path, int N, const std::string& fs, const std::string& gs,
             bool normalized, Emitter& em) {
  if (N < 0) throw error(errc::input, "--order must be nonnegative");
  StarBudget budget{N};
  ChartGeometry c = load_chart(path, budget.jet_order());
  auto geom = std::make_shared<DerivedGeometry>(derive_all(c));
  FedosovSolution sol(geom, budget.r_max_deg());
  Jet f = parse_polynomial(fs, c.dim, c.order);
  Jet g = parse_polynomial(gs, c.dim, c.order);
  Variant v = normalized ? Variant::weyl : Variant::wick;
  FormalFunction prod = star_multiply(sol, FormalFunction::from_jet(f),
                                      FormalFunction::from_jet(g), N, v);
  em.kv("chart", c.name);
  em.kv("product", normalized ? "normalized" : "standard");
  em.kv("f", fs);
  em.kv("g", gs);
  json coeffs = json::array();
  for (int r = 0; r <= N; ++r) {
    Jet cr = prod.coefficient(r, c.dim, c.order);
    coeffs.push_back({{"r", r},
                      {"jet", cr.to_string()},
                      {"at_base", to_string(prod.value_at_base(r))}});
    if (!em.as_json)
      std::cout << "C_" << r << "(f,g) = " << cr.to_string()
                << "   at base: " << to_string(prod.value_at_base(r)) << "\n";
  }
  em.doc["coefficients"] = coeffs;
  em.flush();
  return 0;
}

int cmd_class(const std::string& path, Emitter& em) {
  // The antisymmetric second-order cross-check runs a full order-2 star
  // product, which needs the deeper recursion budget.
  StarBudget budget{2};
  ChartGeometry c = load_chart(path, budget.jet_order());
  auto geom = std::make_shared<DerivedGeometry>(derive_all(c));
  FedosovSolution sol(geom, budget.r_max_deg());
  ClassCheckReport rep = canonical_class_check(sol);
  em.kv("chart", c.name);
  print_json_block(em, "kappa", matrix_json(rep.kappa.comp));
  print_json_block(em, "kappa_from_rprime", matrix_json(kappa_from_rprime(sol).comp));
  print_json_block(em, "kappa_from_laplacian", matrix_json(kappa_from_laplacian(sol).comp));
  print_json_block(em, "kappa_from_curvature", matrix_json(kappa_from_curvature(sol).comp));
  em.check_line("three_routes_agree", rep.routes_agree, "");
  em.check_line("second_order_antisymmetric_part_matches_kappa", rep.c2_route_agrees, "");
  em.check_line("lambda_equals_d_mu", rep.lambda_equals_dmu, "");
  em.check_line("degree3_split", rep.lemma_split_holds, "");
  em.check_line("commutator_laplace_relation", rep.lemma_laplace_holds, "");
  em.check_line("exactness_witness", rep.exactness_witness_holds, "");
  em.check_line("kappa_closed", rep.kappa_closed, "");
  em.check_line("gamma_closed", rep.gamma_closed, "");
  em.check_line("curvature_trace_zero", rep.trace_R_zero, "");
  bool ok = rep.routes_agree && rep.c2_route_agrees && rep.lambda_equals_dmu &&
            rep.lemma_split_holds && rep.lemma_laplace_holds && rep.exactness_witness_holds &&
            rep.kappa_closed && rep.gamma_closed && rep.trace_R_zero;
  em.kv("verdict", ok ? "pass" : "fail");
  em.flush();
  return ok ? 0 : 1;
}

Jet sample_poly(int dim, int order, unsigned seed) {
  // Small deterministic polynomial with varied coefficients.
  Jet f = Jet::constant(dim, order, GaussianRational(long(1 + seed % 3)));
  for (int j = 1; j <= dim; ++j) {
    long a = static_cast<long>((seed * 37 + 11 * j) % 5) - 2;
    if (a != 0) f = f + Jet::variable(dim, order, j).scaled(GaussianRational(a));
    int k = 1 + static_cast<int>((seed + j) % dim);
    long b = static_cast<long>((seed * 13 + 7 * j) % 3) - 1;
    if (b != 0)
      f = f + (Jet::variable(dim, order, j) * Jet::variable(dim, order, k))
                  .scaled(GaussianRational(b, 2));
  }
  return f;
}

int cmd_selftest(const std::string& charts_dir, Emitter& em) {
  bool all = true;
  const int N = 1;
  StarBudget budget{N};
  for (const char* name : {"flat2d", "flat_c2", "kahler2d", "nonintegrable4d"}) {
    std::string path = charts_dir + "/" + name + ".json";
    ChartGeometry c = load_chart(path, budget.jet_order());
    ValidationReport vr = validate_chart(c);
    em.check_line(std::string(name) + ".geometry", vr.all_pass(), vr.first_failure());
    all = all && vr.all_pass();
    if (!vr.all_pass()) continue;
    auto geom = std::make_shared<DerivedGeometry>(derive_all(c));
    FedosovSolution sol(geom, budget.r_max_deg());

    bool resid = true;
    for (int d = 1; d + 1 <= budget.r_max_deg(); ++d)
      resid = resid && reliably_zero(sol.equation_residual(d));
    em.check_line(std::string(name) + ".fedosov_equation", resid, "");
    all = all && resid;

    Jet one = Jet::constant(c.dim, c.order, GaussianRational(1));
    Jet f = sample_poly(c.dim, c.order, 3);
    Jet g = sample_poly(c.dim, c.order, 8);
    FormalFunction F = FormalFunction::from_jet(f), G = FormalFunction::from_jet(g);
    FormalFunction One = FormalFunction::from_jet(one);
    bool unit = reliably_equal(star_multiply(sol, One, F, N, Variant::wick), F, N) &&
                reliably_equal(star_multiply(sol, F, One, N, Variant::wick), F, N) &&
                reliably_equal(star_multiply(sol, One, F, N, Variant::weyl), F, N) &&
                reliably_equal(star_multiply(sol, F, One, N, Variant::weyl), F, N);
    em.check_line(std::string(name) + ".unitality", unit, "");
    all = all && unit;

    FormalFunction fg = star_multiply(sol, F, G, N, Variant::wick);
    FormalFunction gf = star_multiply(sol, G, F, N, Variant::wick);
    Jet pb = poisson_bracket(*geom, f, g);
    Jet comm1 = fg.coefficient(1, c.dim, c.order) - gf.coefficient(1, c.dim, c.order);
    bool c1 = agree_at_reliable_order(comm1, pb.scaled(GaussianRational::unit_i()));
    FormalFunction fgp = star_multiply(sol, F, G, N, Variant::weyl);
    Jet c1p = fgp.coefficient(1, c.dim, c.order);
    bool c1prime = agree_at_reliable_order(
        c1p, pb.scaled(GaussianRational(Rational(0), Rational(1, 2))));
    em.check_line(std::string(name) + ".first_order_brackets", c1 && c1prime, "");
    all = all && c1 && c1prime;

    bool c0ok = agree_at_reliable_order(fg.coefficient(0, c.dim, c.order), f * g);
    em.check_line(std::string(name) + ".zeroth_order", c0ok, "");
    all = all && c0ok;
  }
  em.kv("verdict", all ? "pass" : "fail");
  em.flush();
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact chart-local star products on almost-Kaehler charts"};
  app.require_subcommand(1);
  std::string format = "text";
  app.add_option("--format", format, "Output format: text or json")
      ->check(CLI::IsMember({"text", "json"}));

  std::string chart_path, f_expr, g_expr, charts_dir = "charts";
  int order = 2;
  bool normalized = false;

  auto* check = app.add_subcommand("check", "Validate a chart and derive its geometry");
  check->add_option("chart", chart_path)->required();
  auto* conn = app.add_subcommand("connection", "Print connection and curvature data");
  conn->add_option("chart", chart_path)->required();
  auto* star = app.add_subcommand("star", "Star-multiply two polynomials");
  star->add_option("chart", chart_path)->required();
  star->add_option("--order", order, "Highest formal order to report");
  star->add_option("--f", f_expr)->required();
  star->add_option("--g", g_expr)->required();
  star->add_flag("--normalized", normalized, "Use the normalized product");
  auto* cls = app.add_subcommand("class", "Characteristic 2-form by all routes");
  cls->add_option("chart", chart_path)->required();
  auto* self = app.add_subcommand("selftest", "Run the invariant suite on the bundled corpus");
  self->add_option("--charts", charts_dir, "Directory holding the bundled charts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Emitter em;
  em.as_json = format == "json";
  try {
    if (check->parsed()) return cmd_check(chart_path, em);
    if (conn->parsed()) return cmd_connection(chart_path, em);
    if (star->parsed()) return cmd_star(chart_path, order, f_expr, g_expr, normalized, em);
    if (cls->parsed()) return cmd_class(chart_path, em);
    if (self->parsed()) return cmd_selftest(charts_dir, em);
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
