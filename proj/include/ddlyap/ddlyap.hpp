#pragma once

#include "ddlyap/approx.hpp"
#include "ddlyap/core.hpp"
#include "ddlyap/fundamental.hpp"
#include "ddlyap/jumps.hpp"
#include "ddlyap/lyapunov.hpp"
#include "ddlyap/oracle.hpp"
#include "ddlyap/rational.hpp"
#include "ddlyap/system.hpp"
