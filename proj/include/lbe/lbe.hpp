#pragma once

#include "lbe/case_studies.hpp"
#include "lbe/dsl.hpp"
#include "lbe/expression.hpp"
#include "lbe/metrics.hpp"
#include "lbe/model.hpp"
#include "lbe/report_io.hpp"
#include "lbe/simulation.hpp"
