// Delay-time structure of C3C4C3 and C4C3C4: the first output pulses are
// attributed to the walks that produce them.

#include "qgraph/graph.hpp"
#include "qgraph/paths.hpp"
#include "qgraph/time_domain.hpp"

#include <cstdio>

int main() {
    using namespace qgraph;
    const double l = 0.25;
    PulseSpec pulse;
    pulse.t0 = 1e-9;

    for (const auto& [name, sizes] : {std::pair{"C3C4C3", std::vector<int>{3, 4, 3}},
                                      std::pair{"C4C3C4", std::vector<int>{4, 3, 4}}}) {
        const auto g = build_polygon_chain({sizes, {l, l, l}, l});
        const auto res = synthesize_output_auto(g, pulse, 0.0, 5e-12, 40e-9);
        const auto peaks = trace_peaks(res.output, 1e-2 * pulse.amplitude);
        const auto groups = group_paths(enumerate_paths(g, 7 * l).paths);
        std::printf("%s (%zu samples)\n", name, res.output.size());
        for (std::size_t i = 0; i < groups.size() && i < peaks.size(); ++i) {
            std::printf("  %.0f l: t - t0 = %.4f ns, V = %.4f (paths %zu, predicted %.4f):", groups[i].length / l,
                        (peaks[i].time - pulse.t0) * 1e9, peaks[i].volts, groups[i].members.size(),
                        groups[i].amplitude * pulse.amplitude);
            for (const auto& p : groups[i].members) std::printf(" %s", p.label(g).c_str());
            std::printf("\n");
        }
    }
}
