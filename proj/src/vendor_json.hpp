#ifndef DDTWA_VENDOR_JSON_HPP
#define DDTWA_VENDOR_JSON_HPP

#include <json.hpp>

#endif
