#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "iirpl/sos.hpp"

namespace {

iirpl::SosCascade make_cascade(int sections) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> r(0.3, 0.9), th(0.1, 3.0);
  std::vector<iirpl::Biquad> s;
  for (int i = 0; i < sections; ++i) {
    const double rp = r(rng), tp = th(rng), tz = th(rng);
    s.push_back({1.0, -2.0 * std::cos(tz), rp * rp, -2.0 * rp * std::cos(tp)});
  }
  return iirpl::SosCascade(1.0, s);
}

void BM_Gradients(benchmark::State& st) {
  const iirpl::SosCascade c = make_cascade(static_cast<int>(st.range(0)));
  double w = 0.1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(iirpl::gradients(c, w));
    w = w < 3.0 ? w + 1e-3 : 0.1;
  }
}
BENCHMARK(BM_Gradients)->Arg(4)->Arg(8)->Arg(16);

}  // namespace
BENCHMARK_MAIN();
