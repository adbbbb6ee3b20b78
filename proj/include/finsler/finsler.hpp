#ifndef FINSLER_FINSLER_HPP
#define FINSLER_FINSLER_HPP

#include "finsler/cantor.hpp"
#include "finsler/catalog.hpp"
#include "finsler/core.hpp"
#include "finsler/distance.hpp"
#include "finsler/dual.hpp"
#include "finsler/grid.hpp"
#include "finsler/harness.hpp"
#include "finsler/polyline.hpp"
#include "finsler/report.hpp"
#include "finsler/rng.hpp"
#include "finsler/structure.hpp"

#endif  // FINSLER_FINSLER_HPP
