#include <benchmark/benchmark.h>

#include <memory>

#include "archgraph/query.hpp"
#include "archgraph/transform.hpp"
#include "support.hpp"

namespace ag = archgraph;

namespace {

// one corpus per size, built lazily and kept for the whole run
struct Fixture {
  explicit Fixture(std::size_t n) : dir("bench"), corpus(dir.path(), n, 5, 4) {
    view = ag::CurationView::of(*corpus.curation);
    iris = std::make_unique<ag::IriScheme>(corpus.config, view);
    env = {&corpus.config, &corpus.ontology, iris.get()};
    tmpl = corpus.records->get_template("ship-register");
    for (const auto& [id, version] : corpus.records->published())
      inputs.push_back({corpus.records->get_record(id, version), version, &tmpl, &corpus.mappings.at("ship-register")});
  }
  ag::testing::TempDir dir;
  ag::testing::SyntheticCorpus corpus;
  ag::CurationView view;
  std::unique_ptr<ag::IriScheme> iris;
  ag::TransformEnv env;
  ag::Template tmpl;
  std::vector<ag::RecordInput> inputs;
};

Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fixture>(n);
  return *slot;
}

void BM_TransformSerial(benchmark::State& state) {
  auto& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ag::transform_records_serial(f.inputs, f.env));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TransformParallel(benchmark::State& state) {
  auto& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ag::transform_records_parallel(f.inputs, f.env));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GroupedQuery(benchmark::State& state) {
  auto& f = fixture(state.range(0));
  ag::transform_all(ag::TransformScope::everything(), *f.corpus.records, *f.corpus.curation, f.corpus.mappings,
                    f.corpus.ontology, f.corpus.config, *f.corpus.graphs, true);
  auto snap = f.corpus.graphs->snapshot();
  auto q = ag::parse_query(ag::Json::parse(ag::read_file(ag::testing::maritime("queries/ships-by-construction-place.json"))));
  for (auto _ : state) benchmark::DoNotOptimize(ag::run_query(*snap, q));
  state.counters["quads"] = static_cast<double>(snap->size());
}

}  // namespace

BENCHMARK(BM_TransformSerial)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TransformParallel)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GroupedQuery)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
