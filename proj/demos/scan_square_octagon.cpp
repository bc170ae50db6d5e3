// Log-Minkowski path from the unit square to a regular octagon. The square is
// put on the octagon's normals with slightly raised diagonal heights, so the
// diagonal facets appear partway along the path.

#include <iostream>

#include "lpbm/lpbm.hpp"

int main() {
    const lpbm::SupportVector square = lpbm::axis_box(2);
    const lpbm::SupportVector octagon = lpbm::regular_polygon(8);
    const lpbm::MergedPair pair = lpbm::merge_pair(square, octagon, lpbm::MergeMode::Raise, 0.01, 7);

    const lpbm::ScanReport report = lpbm::scan(lpbm::path_from_bodies(pair.k, pair.l, 0.0), 65, 1e-10);
    for (const lpbm::ScanEvent& e : report.events) {
        std::cout << "a-type change in [" << e.lo << ", " << e.hi << "]\n";
    }
    std::cout << "concave: " << (report.concave ? "yes" : "no") << "\n\n";
    lpbm::write_scan_csv(std::cout, report);
}
