#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>

#include "cspb/canonical.hpp"
#include "cspb/datalog.hpp"
#include "cspb/hom_search.hpp"
#include "cspb/pathscape.hpp"
#include "cspb/structure.hpp"
#include "cspb/succ_ro.hpp"

using namespace cspb;

namespace {

const char* kStConn =
    "edb E/2, S/1, T/1.\n"
    "idb I/1, G/0.\n"
    "goal G.\n"
    "I(x) :- S(x).\n"
    "I(y) :- I(x), E(x,y).\n"
    "G :- I(x), T(x).\n";

Structure random_digraph(std::uint32_t seed, int n, double p) {
    std::mt19937 rng(seed);
    std::vector<std::string> dom;
    for (int i = 0; i < n; ++i) dom.push_back("e" + std::to_string(i));
    std::bernoulli_distribution arc(p);
    std::map<std::string, std::set<Tuple>> rel;
    rel["E"];
    for (const auto& u : dom)
        for (const auto& v : dom)
            if (arc(rng)) rel["E"].insert({u, v});
    return Structure(Vocabulary{{{"E", 2}}}, dom, rel);
}

Structure st_instance(std::uint32_t seed, int n, double p) {
    std::mt19937 rng(seed);
    std::vector<std::string> dom;
    for (int i = 1; i <= n; ++i) dom.push_back(std::to_string(i));
    std::bernoulli_distribution arc(p);
    std::map<std::string, std::set<Tuple>> rel;
    rel["E"];
    for (const auto& u : dom)
        for (const auto& v : dom)
            if (arc(rng)) rel["E"].insert({u, v});
    rel["S"] = {{dom.front()}};
    rel["T"] = {{dom.back()}};
    return Structure(Vocabulary{{{"E", 2}, {"S", 1}, {"T", 1}}}, dom, rel);
}

void bm_hom_search(benchmark::State& state) {
    Structure a = random_digraph(7, static_cast<int>(state.range(0)), 0.3);
    Structure b = random_digraph(9, 3, 0.6);
    for (auto _ : state) benchmark::DoNotOptimize(find_homomorphism(a, b));
}
BENCHMARK(bm_hom_search)->Arg(6)->Arg(8)->Arg(10);

void bm_datalog_eval(benchmark::State& state) {
    DatalogProgram p = parse_program(kStConn);
    Structure a = st_instance(11, static_cast<int>(state.range(0)), 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(p, a).accepted);
}
BENCHMARK(bm_datalog_eval)->Arg(8)->Arg(16)->Arg(32);

void bm_canonical_accept(benchmark::State& state) {
    Structure b = parse_structure("domain: 0 1\nE/2: (0,0) (0,1) (1,1)\n");
    Structure a = random_digraph(13, static_cast<int>(state.range(0)), 0.4);
    for (auto _ : state)
        benchmark::DoNotOptimize(canonical_accept(b, 1, 2, CanonicalMode::linear, a).accepted);
}
BENCHMARK(bm_canonical_accept)->Arg(4)->Arg(6);

void bm_zigzag(benchmark::State& state) {
    int h = static_cast<int>(state.range(0));
    OrientedPath straight(std::string(h, 'F'));
    Structure s = straight.to_structure();
    std::vector<Structure> bags;
    for (int i = 0; i < h; ++i)
        bags.push_back(s.induced({"v" + std::to_string(i), "v" + std::to_string(i + 1)}));
    PathRepresentation rep{bags, 1, 2};
    OrientedPath p(h == 2 ? "FF" : std::string(h - 1, 'F') + "BFF");
    for (auto _ : state) benchmark::DoNotOptimize(zigzag(rep, p).bags.size());
}
BENCHMARK(bm_zigzag)->Arg(2)->Arg(4)->Arg(6);

void bm_mnbp_eval(benchmark::State& state) {
    DatalogProgram p = parse_program(kStConn);
    int n = static_cast<int>(state.range(0));
    Mnbp h = compile_to_mnbp(p, n);
    SuccessorStructure a = SuccessorStructure::from_numbered(st_instance(17, n, 0.3));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_mnbp(h, a).accepted);
}
BENCHMARK(bm_mnbp_eval)->Arg(4)->Arg(8)->Arg(16);

} // namespace

BENCHMARK_MAIN();
