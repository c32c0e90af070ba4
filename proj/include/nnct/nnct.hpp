#pragma once

#include "errors.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "montecarlo.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "permutation.hpp"
#include "random.hpp"
#include "report.hpp"
#include "segregation.hpp"
#include "table.hpp"
#include "version.hpp"
