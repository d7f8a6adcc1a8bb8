// Q_3..Q_6 of the partition generating function as t approaches 1, with
// the verdict of the trend classifier.
#include <cstdio>

#include <khinchin/khinchin.hpp>

int main() {
    using namespace khinchin;
    auto f = build("partitions:p=1");
    const QuotientDiagnostics d = diagnose(*f, default_grid(*f), 6);
    std::printf("%-22s %12s %12s %12s %12s\n", "t", "Q3", "Q4", "Q5", "Q6");
    for (std::size_t i = 0; i < d.t_grid.size(); ++i)
        std::printf("%-22.17g %12.5g %12.5g %12.5g %12.5g\n", to_double(d.t_grid[i]), d.values[3][i],
                    d.values[4][i], d.values[5][i], d.values[6][i]);
    for (int k = 3; k <= 6; ++k) std::printf("Q%d: %s\n", k, to_string(d.trend(k)));
    std::printf("verdict: %s\n", to_string(d.verdict));
}
