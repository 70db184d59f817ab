#pragma once

namespace sdwave {

/// Value and first two derivatives of a scalar function at a point.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

} // namespace sdwave
