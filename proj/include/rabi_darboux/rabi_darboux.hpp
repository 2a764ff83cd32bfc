#pragma once

#include "rabi_darboux/csv.hpp"
#include "rabi_darboux/darboux.hpp"
#include "rabi_darboux/errors.hpp"
#include "rabi_darboux/integrator.hpp"
#include "rabi_darboux/observables.hpp"
#include "rabi_darboux/runner.hpp"
#include "rabi_darboux/spline.hpp"
#include "rabi_darboux/susy_checks.hpp"
#include "rabi_darboux/twolevel.hpp"
