#pragma once

#include "octseg/boundaries.hpp"
#include "octseg/config.hpp"
#include "octseg/config_json.hpp"
#include "octseg/curve_fit.hpp"
#include "octseg/error.hpp"
#include "octseg/filters.hpp"
#include "octseg/harness.hpp"
#include "octseg/image.hpp"
#include "octseg/io.hpp"
#include "octseg/metrics.hpp"
#include "octseg/phantom.hpp"
#include "octseg/pipeline.hpp"
#include "octseg/segmentation.hpp"
