#pragma once

#include "config.hpp"
#include "map_core.hpp"
#include "orbit.hpp"
#include "kneading.hpp"
#include "classify.hpp"
#include "render.hpp"
