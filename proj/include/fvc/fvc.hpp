#pragma once

#include "fvc/errors.hpp"
#include "fvc/special.hpp"
#include "fvc/linalg.hpp"
#include "fvc/quadrature.hpp"
#include "fvc/chebyshev.hpp"
#include "fvc/fracops.hpp"
#include "fvc/jet.hpp"
#include "fvc/expr.hpp"
#include "fvc/variational.hpp"
#include "fvc/solver.hpp"
#include "fvc/legendre.hpp"
#include "fvc/sweep.hpp"
#include "fvc/io.hpp"
