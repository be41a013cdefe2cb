#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "archgraph/curation_store.hpp"
#include "archgraph/config.hpp"
#include "archgraph/nquads.hpp"
#include "archgraph/ontology.hpp"
#include "archgraph/query.hpp"

// Brute-force reference implementations used to check the engine.
namespace archgraph::oracle {

using Partition = std::set<std::set<std::string>>;

// Masters of one entity type as sets of local ids.
Partition partition_of(const CurationStore& store, const std::string& entity_type);

// Recomputes auto-matching from scratch: locals are visited in id order
// within each key class, and a local joins the first earlier cluster of its
// class whose members carry no unmatch decision against any member of the
// local's cluster. Pairwise scans only.
Partition match_partition(const std::vector<LocalInstance>& locals, const std::vector<UnmatchException>& exceptions,
                          const std::vector<MatchRule>& rules, const std::string& entity_type);

// One randomized matching trial: `n` synthetic person mentions with
// spelling variants, auto-matched, partly unmatched, and auto-matched again.
// Each partition is compared with match_partition().
struct MatchTrial {
  std::size_t locals = 0;
  std::size_t exceptions = 0;
  std::size_t comparisons = 0;
  std::size_t discrepancies = 0;
  std::string detail;  // first discrepancy
};
MatchTrial match_trial(std::uint32_t seed, std::size_t n);

// Floyd-Warshall reachability over the nodes of `edges`.
std::set<std::pair<std::string, std::string>> closure(const std::vector<std::pair<std::string, std::string>>& edges);

// Random DAG over nodes "n0".."n<n-1>": edges only go from earlier to later
// positions of a shuffled order. With `forest`, every node gets at most one
// outgoing edge.
std::vector<std::pair<std::string, std::string>> random_dag(std::mt19937& rng, int n, bool forest = false);

// Naive query evaluation: every pattern is matched against every quad in
// the order written, optionals by a full scan per solution.
ResultTable evaluate(const std::vector<Quad>& quads, const Query& q);

// Random store over a small vocabulary: `n` quads in three graphs, with
// IRI, string, number and date objects.
std::vector<Quad> random_store(std::mt19937& rng, std::size_t n);

// Random well-formed query over the vocabulary of random_store(): 1-3 joined
// patterns, optional groups, filters, projection, grouping.
Query random_query(std::mt19937& rng);

// Brute-force domain/range scan over every quad: "<rule> <property> <line>".
std::set<std::string> schema_violations(const std::vector<Quad>& quads, const OntologySchema& ontology,
                                        const Config& config);

// Pairwise duplicate-master scan: (entity type, master a, master b), a < b.
std::set<std::tuple<std::string, std::string, std::string>> duplicate_pairs(const CurationStore& store,
                                                                         const std::vector<MatchRule>& rules);

}  // namespace archgraph::oracle
