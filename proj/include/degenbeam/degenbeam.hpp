#pragma once

#include "degenbeam/coeff.hpp"
#include "degenbeam/constants.hpp"
#include "degenbeam/dynamics.hpp"
#include "degenbeam/elliptic.hpp"
#include "degenbeam/errors.hpp"
#include "degenbeam/expression.hpp"
#include "degenbeam/femdisc.hpp"
#include "degenbeam/hum.hpp"
#include "degenbeam/identities.hpp"
#include "degenbeam/mesh.hpp"
#include "degenbeam/observability.hpp"
#include "degenbeam/quadrature.hpp"
