// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avir/data_io.hpp"
#include "avir/errors.hpp"
#include "avir/harness.hpp"
#include "avir/metrics.hpp"
#include "avir/model_clients.hpp"
#include "avir/selector.hpp"
