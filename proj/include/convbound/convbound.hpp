#pragma once

#include "convbound/certificate.hpp"
#include "convbound/controller.hpp"
#include "convbound/errors.hpp"
#include "convbound/estimator.hpp"
#include "convbound/gain_map.hpp"
#include "convbound/linalg.hpp"
#include "convbound/margins.hpp"
#include "convbound/osa_controller.hpp"
#include "convbound/parameter_set.hpp"
#include "convbound/plant.hpp"
#include "convbound/polynomial.hpp"
#include "convbound/pp_controller.hpp"
#include "convbound/regressor.hpp"
#include "convbound/signals.hpp"
#include "convbound/simulator.hpp"
#include "convbound/time_variation.hpp"
#include "convbound/trace.hpp"
#include "convbound/umd.hpp"
