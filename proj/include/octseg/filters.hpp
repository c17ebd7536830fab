#pragma once

#include "octseg/filters/canny.hpp"
#include "octseg/filters/gaussian.hpp"
#include "octseg/filters/intensity.hpp"
#include "octseg/filters/morphology.hpp"
#include "octseg/filters/structure_tensor.hpp"
#include "octseg/filters/threshold.hpp"
#include "octseg/filters/wiener.hpp"
