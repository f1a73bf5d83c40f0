#pragma once

#include "fairalloc/analysis/bootstrap.hpp"
#include "fairalloc/analysis/logistic.hpp"
#include "fairalloc/analysis/poststratification.hpp"
#include "fairalloc/analysis/report.hpp"
#include "fairalloc/analysis/respondent.hpp"
