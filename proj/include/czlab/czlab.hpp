#pragma once

#include "czlab/constants.hpp"
#include "czlab/core.hpp"
#include "czlab/geometry.hpp"
#include "czlab/harness.hpp"
#include "czlab/kernel.hpp"
#include "czlab/measure.hpp"
#include "czlab/norms.hpp"
#include "czlab/operators.hpp"
