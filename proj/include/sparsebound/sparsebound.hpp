#pragma once

#include "sparsebound/bounds.hpp"
#include "sparsebound/errors.hpp"
#include "sparsebound/estimators.hpp"
#include "sparsebound/experiments.hpp"
#include "sparsebound/fano.hpp"
#include "sparsebound/io.hpp"
#include "sparsebound/linalg.hpp"
#include "sparsebound/packing.hpp"
#include "sparsebound/random.hpp"
#include "sparsebound/report.hpp"
