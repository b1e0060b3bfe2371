#pragma once

#include <memory>
#include <vector>

#include "trajclust/method.hpp"

namespace trajclust {

/// kml, lmkm, gbtm, gmm, kmedoids, stratify, random, feature.
std::vector<std::shared_ptr<const Method>> builtin_methods();

}  // namespace trajclust
