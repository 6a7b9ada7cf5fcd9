#include <benchmark/benchmark.h>

#include <string>

#include "sysopt/parser.hpp"

namespace {

// Synthetic unit with `classes` classes of four methods each.
std::string synthetic_unit(int classes) {
    std::string src = "package bench;\n\nimport javax.persistence.EntityManager;\n\n";
    for (int c = 0; c < classes; ++c) {
        std::string name = "C" + std::to_string(c);
        src += "public class " + name + " {\n";
        src += "    private EntityManager em;\n";
        src += "    private boolean ready;\n";
        src += "    public void load(Request q) {\n";
        src += "        for (int i = 0; i < 10; i++) {\n";
        src += "            em.createQuery(\"select x\");\n";
        src += "        }\n";
        src += "    }\n";
        src += "    public synchronized void mark(boolean v) { this.ready = v; }\n";
        src += "    public void emit(Request q) { helper(q); helper(q); }\n";
        src += "    private void helper(Request q) { new StringBuilder(); }\n";
        src += "}\n\n";
    }
    return src;
}

void parse_unit_bench(benchmark::State& state) {
    std::string src = synthetic_unit(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        sysopt::ParsedUnit parsed = sysopt::parse_unit(src, "bench/Unit.java");
        benchmark::DoNotOptimize(parsed);
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(src.size()));
}

}  // namespace

BENCHMARK(parse_unit_bench)->Arg(1)->Arg(16)->Arg(128);
