#pragma once

#include "cbo/angle.hpp"
#include "cbo/core.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/family.hpp"
#include "cbo/json_io.hpp"
#include "cbo/loci.hpp"
#include "cbo/pcf.hpp"
#include "cbo/rays.hpp"
#include "cbo/render.hpp"
