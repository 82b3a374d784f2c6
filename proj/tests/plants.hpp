#pragma once

#include <vector>

namespace plants {

struct Example {
    const char* name;
    std::vector<double> num;
    std::vector<double> den;
    double K;
};

inline const Example ex1{"ex1", {-1.0}, {1.0, -0.4}, 1.0};
inline const Example ex2{"ex2", {2.0, -1.0}, {20.0, -10.0, 10.0}, 9.0};
inline const Example ex3{"ex3", {-10.0, -19.0, -9.0}, {100.0, -80.0, 17.0, -1.0}, 3.0};
inline const Example ex4{"ex4", {-0.1, 0.0}, {1.0, -1.8, 0.81}, 12.0};

inline const std::vector<Example> all{ex1, ex2, ex3, ex4};

}  // namespace plants
