// Transmission of the C3C4C3 filter: full-transmission peaks inside the
// suppression band and their widths, with and without cable loss.

#include "qgraph/graph.hpp"
#include "qgraph/resonance.hpp"
#include "qgraph/scattering.hpp"

#include <cstdio>
#include <numbers>

int main() {
    using namespace qgraph;
    constexpr double pi = std::numbers::pi;
    const double l = 0.25;
    const auto g = build_polygon_chain({{3, 4, 3}, {l, l, l}, l});

    for (double beta : {0.0, 0.009}) {
        const auto scan = transmission_scan(g, 0.5 * pi / l, 1.5 * pi / l, 40001, beta);
        std::printf("beta = %.3f m^-1/2\n", beta);
        std::printf("  %12s %10s %10s %10s\n", "nu [MHz]", "kl/pi", "T", "FWHM [MHz]");
        for (const auto& r : peak_analysis(scan, 0.05))
            std::printf("  %12.3f %10.5f %10.5f %10.3f\n", r.center_hz / 1e6, r.center_k * l / pi, r.height,
                        r.fwhm_hz / 1e6);
    }
}
