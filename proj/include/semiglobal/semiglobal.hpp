#pragma once

#include "semiglobal/assemble.hpp"
#include "semiglobal/baseflow.hpp"
#include "semiglobal/bvp.hpp"
#include "semiglobal/geometry.hpp"
#include "semiglobal/grid.hpp"
#include "semiglobal/interpolate.hpp"
#include "semiglobal/mapping.hpp"
#include "semiglobal/newton.hpp"
#include "semiglobal/stability.hpp"
#include "semiglobal/subdomain.hpp"
