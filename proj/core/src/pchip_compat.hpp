#pragma once

#include <cmath>

// boost 1.74 pchip calls isnan unqualified
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
