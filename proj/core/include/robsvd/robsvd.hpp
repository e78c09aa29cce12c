#pragma once

#include "robsvd/dataset.hpp"
#include "robsvd/error.hpp"
#include "robsvd/locscale.hpp"
#include "robsvd/matrix.hpp"
#include "robsvd/regress.hpp"
#include "robsvd/result_io.hpp"
#include "robsvd/tables.hpp"
#include "robsvd/total_svd.hpp"
#include "robsvd/weights.hpp"
