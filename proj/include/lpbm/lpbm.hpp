#pragma once

#include "lpbm/atype.hpp"
#include "lpbm/campaign.hpp"
#include "lpbm/error.hpp"
#include "lpbm/generate.hpp"
#include "lpbm/geometry.hpp"
#include "lpbm/hausdorff.hpp"
#include "lpbm/json_io.hpp"
#include "lpbm/lambda_scan.hpp"
#include "lpbm/local_form.hpp"
#include "lpbm/lp_combine.hpp"
#include "lpbm/mixed_volumes.hpp"
#include "lpbm/parallel.hpp"
#include "lpbm/support_vector.hpp"
