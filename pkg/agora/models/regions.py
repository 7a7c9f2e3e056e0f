"""Region codes."""

from enum import Enum


class Region(str, Enum):
    EU = "EU"
    NA = "NA"
    ME = "ME"
    AS = "AS"

    def __str__(self) -> str:
        return self.value


ANY_REGION = "ANY"
REGION_ORDER = {region: i for i, region in enumerate(Region)}
