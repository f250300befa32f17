#pragma once

// Umbrella header.

#include "isobenefit/Benefit.hpp"
#include "isobenefit/Config.hpp"
#include "isobenefit/DnaAudit.hpp"
#include "isobenefit/Errors.hpp"
#include "isobenefit/Grid.hpp"
#include "isobenefit/Morphogenesis.hpp"
#include "isobenefit/Numeric.hpp"
#include "isobenefit/Random.hpp"
#include "isobenefit/Raster.hpp"
#include "isobenefit/Render.hpp"
#include "isobenefit/Reporting.hpp"
