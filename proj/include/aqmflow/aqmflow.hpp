#pragma once

#include "aqm.hpp"
#include "analysis.hpp"
#include "config.hpp"
#include "core.hpp"
#include "experiment.hpp"
#include "models.hpp"
#include "report.hpp"
#include "stability.hpp"
