// Times the parallel kernels in serial vs OpenMP mode and verifies both
// modes produce bit-identical results.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "yatt/baselines.hpp"
#include "yatt/exec.hpp"
#include "yatt/genotype.hpp"
#include "yatt/model.hpp"
#include "yatt/rng.hpp"

using namespace yatt;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best;
}

PreparedRecord random_record(Rng& rng, std::size_t t_steps, std::size_t dim) {
  PreparedRecord rec;
  rec.sequence.assign(t_steps, Vec(dim));
  for (auto& step : rec.sequence)
    for (double& v : step) v = rng.uniform(-1.0, 1.0);
  rec.statics_after = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  rec.target_scaled = rng.uniform(-0.9, 0.9);
  rec.yield = 40.0 + 20.0 * rec.target_scaled;
  return rec;
}

struct Row {
  std::string name;
  double serial_ms = 0.0;
  double openmp_ms = 0.0;
  bool identical = false;
};

void print_row(const Row& r) {
  std::printf("%-18s %10.2f ms %10.2f ms %7.2fx   %s\n", r.name.c_str(),
              r.serial_ms, r.openmp_ms, r.serial_ms / r.openmp_ms,
              r.identical ? "identical" : "DIFFER");
}

}  // namespace

int main() {
  Rng rng(2024);
  std::vector<Row> rows;

  // --- batch gradients -----------------------------------------------------
  {
    ModelConfig cfg;
    cfg.kind = ModelKind::attention;
    cfg.encoder.input_dim = 9;
    cfg.encoder.h1 = 32;
    cfg.encoder.h2 = 16;
    cfg.encoder.t_steps = 30;
    cfg.statics_after = 2;
    const ModelWeights w = build_model(cfg, 1);
    std::vector<PreparedRecord> records;
    std::vector<std::uint64_t> dropout_seeds;
    for (int i = 0; i < 64; ++i) {
      records.push_back(random_record(rng, cfg.encoder.t_steps, cfg.encoder.input_dim));
      dropout_seeds.push_back(1000 + static_cast<std::uint64_t>(i));
    }
    std::vector<const PreparedRecord*> batch;
    for (const auto& r : records) batch.push_back(&r);

    BatchGradResult out;
    const auto work = [&] { out = batch_gradients(cfg, w, batch, dropout_seeds); };
    exec::set_mode(exec::Mode::serial);
    const double serial_ms = time_ms(work, 5);
    const Vec serial_grads = out.grads.flatten();
    const double serial_loss = out.loss;
    exec::set_mode(exec::Mode::openmp);
    const double openmp_ms = time_ms(work, 5);
    rows.push_back({"batch_gradients", serial_ms, openmp_ms,
                    out.grads.flatten() == serial_grads && out.loss == serial_loss});
  }

  // --- batch prediction ----------------------------------------------------
  {
    ModelConfig cfg;
    cfg.encoder.input_dim = 9;
    cfg.encoder.h1 = 32;
    cfg.encoder.h2 = 16;
    cfg.encoder.t_steps = 30;
    cfg.statics_after = 2;
    const ModelWeights w = build_model(cfg, 2);
    std::vector<PreparedRecord> records;
    for (int i = 0; i < 512; ++i)
      records.push_back(random_record(rng, cfg.encoder.t_steps, cfg.encoder.input_dim));

    Vec out;
    const auto work = [&] { out = predict_scaled(cfg, w, records); };
    exec::set_mode(exec::Mode::serial);
    const double serial_ms = time_ms(work, 5);
    const Vec serial_out = out;
    exec::set_mode(exec::Mode::openmp);
    const double openmp_ms = time_ms(work, 5);
    rows.push_back({"predict", serial_ms, openmp_ms, out == serial_out});
  }

  // --- k-means assignment pass ---------------------------------------------
  {
    const std::size_t n = 240;
    Matrix points(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        points(i, j) = i == j ? 1.0 : rng.uniform(0.0, 1.0);

    KmeansResult out;
    const auto work = [&] { out = kmeans(points, 5, 7); };
    exec::set_mode(exec::Mode::serial);
    const double serial_ms = time_ms(work, 3);
    const std::vector<int> serial_assign = out.assignment;
    const double serial_inertia = out.inertia;
    exec::set_mode(exec::Mode::openmp);
    const double openmp_ms = time_ms(work, 3);
    rows.push_back({"kmeans", serial_ms, openmp_ms,
                    out.assignment == serial_assign && out.inertia == serial_inertia});
  }

  // --- random forest -------------------------------------------------------
  {
    const std::size_t n = 400, f = 50;
    Matrix x(n, f);
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < f; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
      y[i] = 3.0 * x(i, 0) - 2.0 * x(i, 7) + 0.1 * rng.normal(0.0, 1.0);
    }
    ForestParams params;
    params.n_trees = 40;
    params.max_depth = 8;

    ForestModel out;
    const auto work = [&] { out = forest_fit(x, y, params, 11); };
    exec::set_mode(exec::Mode::serial);
    const double serial_ms = time_ms(work, 3);
    const Vec serial_pred = forest_predict(out, x);
    exec::set_mode(exec::Mode::openmp);
    const double openmp_ms = time_ms(work, 3);
    rows.push_back({"forest_fit", serial_ms, openmp_ms,
                    forest_predict(out, x) == serial_pred});
  }

  std::printf("%-18s %13s %13s %8s\n", "kernel", "serial", "openmp", "speedup");
  bool all_identical = true;
  for (const Row& r : rows) {
    print_row(r);
    all_identical = all_identical && r.identical;
  }
  if (!all_identical) {
    std::printf("FAIL: serial and openmp outputs differ\n");
    return 1;
  }
  return 0;
}
