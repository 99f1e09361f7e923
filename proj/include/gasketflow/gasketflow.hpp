#pragma once

#include "gasketflow/error.hpp"
#include "gasketflow/numeric.hpp"
#include "gasketflow/gasket.hpp"
#include "gasketflow/energy.hpp"
#include "gasketflow/measure.hpp"
#include "gasketflow/robin.hpp"
#include "gasketflow/flow.hpp"
#include "gasketflow/parallel.hpp"
#include "gasketflow/verify.hpp"
#include "gasketflow/io.hpp"
#include "gasketflow/commands.hpp"
