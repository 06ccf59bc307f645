#pragma once

// Umbrella header: continuous-logic sentences over finite-dimensional
// tracial *-algebras, with exact subalgebra/commutant arithmetic, a
// stochastic quantifier optimizer, an independent exhaustive oracle, and
// JSON / LaTeX interchange.

#include "tracelogic/algebra.hpp"
#include "tracelogic/builders.hpp"
#include "tracelogic/commutant.hpp"
#include "tracelogic/common.hpp"
#include "tracelogic/evaluate.hpp"
#include "tracelogic/experiment.hpp"
#include "tracelogic/formula.hpp"
#include "tracelogic/group.hpp"
#include "tracelogic/latex.hpp"
#include "tracelogic/modulus.hpp"
#include "tracelogic/oracle.hpp"
#include "tracelogic/prenex.hpp"
#include "tracelogic/serialize.hpp"
#include "tracelogic/term.hpp"
