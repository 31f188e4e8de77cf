#pragma once

// Four-field mixed finite elements for Biot consolidation on the unit
// square, with parameter-robust block-diagonal preconditioners.

#include "biotmix/assembly.hpp"
#include "biotmix/core.hpp"
#include "biotmix/dense.hpp"
#include "biotmix/experiments.hpp"
#include "biotmix/krylov.hpp"
#include "biotmix/ldlt.hpp"
#include "biotmix/mesh.hpp"
#include "biotmix/precond.hpp"
#include "biotmix/quadrature.hpp"
#include "biotmix/sparse.hpp"
#include "biotmix/spaces.hpp"
#include "biotmix/verify.hpp"
