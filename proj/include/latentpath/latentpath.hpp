#pragma once

#include "assessment.hpp"
#include "bootstrap.hpp"
#include "dataset.hpp"
#include "econometrics.hpp"
#include "effects.hpp"
#include "error.hpp"
#include "estimator.hpp"
#include "index_builder.hpp"
#include "model_spec.hpp"
#include "report.hpp"
#include "testkit.hpp"
