#pragma once

#include <pelastica/error.hpp>
#include <pelastica/numerics.hpp>
#include <pelastica/pelliptic.hpp>
#include <pelastica/curves.hpp>
#include <pelastica/hooked.hpp>
#include <pelastica/stability.hpp>
#include <pelastica/io.hpp>
#include <pelastica/verify.hpp>
