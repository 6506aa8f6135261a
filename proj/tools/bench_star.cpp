// Benchmark: OpenMP-parallel fiber products and table extraction against the
// serial reference implementation.
#include <chrono>
#include <iostream>

#include "akdq/chart_io.hpp"
#include "akdq/fedosov.hpp"

using namespace akdq;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

WickElement dense_element(int dim, int order, int max_y, int seed) {
  WickElement e(dim, order);
  MultiIndex y = zero_index(dim);
  // deterministic spread of y-monomials with polynomial coefficients
  for (int d = 0; d <= max_y; ++d) {
    y[seed % dim] = d;
    y[(seed + 1) % dim] = max_y - d;
    Jet c = Jet::constant(dim, order, GaussianRational(1 + (seed + d) % 5));
    for (int j = 1; j <= dim; ++j)
      c = c + Jet::variable(dim, order, j).scaled(GaussianRational((seed + d + j) % 3));
    e.add_key(WickKey{d % 2, y, 0}, c);
    y = zero_index(dim);
  }
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  std::string path = argc > 1 ? argv[1] : "charts/nonintegrable4d.json";
  int reps = argc > 2 ? std::atoi(argv[2]) : 5;
  try {
    auto d = std::make_shared<DerivedGeometry>(derive_all(load_chart(path, 6)));
    JetMatrix lam = wick_pairing(*d);
    int n = d->chart.dim;

    WickElement a = dense_element(n, 6, 4, 1);
    WickElement b = dense_element(n, 6, 4, 2);
    TruncationPolicy p{10};

    Clock::time_point t0 = Clock::now();
    WickElement ser;
    for (int i = 0; i < reps; ++i) ser = fiber_product_serial(a, b, lam, p);
    double t_ser = ms_since(t0) / reps;

    t0 = Clock::now();
    WickElement par;
    for (int i = 0; i < reps; ++i) par = fiber_product(a, b, lam, p);
    double t_par = ms_since(t0) / reps;

    if (!reliably_equal(ser, par)) {
      std::cerr << "FAIL: parallel and serial products disagree\n";
      return 1;
    }
    std::cout << "fiber_product      serial " << t_ser << " ms   parallel " << t_par
              << " ms\n";

    FedosovSolution sol(d, 5);
    t0 = Clock::now();
    StarTables ts = extract_tables(sol, 1, Variant::wick, 2, false);
    double t_tab_ser = ms_since(t0);
    t0 = Clock::now();
    StarTables tp = extract_tables(sol, 1, Variant::wick, 2, true);
    double t_tab_par = ms_since(t0);
    if (ts.entries != tp.entries) {
      std::cerr << "FAIL: parallel and serial tables disagree\n";
      return 1;
    }
    std::cout << "extract_tables     serial " << t_tab_ser << " ms   parallel " << t_tab_par
              << " ms\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
