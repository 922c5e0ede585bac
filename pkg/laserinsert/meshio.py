#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Tue Oct 13 2026

mesh and point cloud file parsers
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from logging import getLogger
from pathlib import Path
from typing import BinaryIO, Dict, Type, Union

import numpy as np
import trimesh
from plyfile import PlyData, PlyElement

from .errors import DegenerateMeshError, InvalidArgumentError
from .geom import PointCloud

logger = getLogger(__file__)


class Parser(ABC):
    @abstractmethod
    def parse(self, file_handler: BinaryIO) -> None:
        ...


@dataclass
class MeshParser(Parser, ABC):
    """Triangle mesh reader, vertices in meters and faces as vertex index
    triples.
    """
    vertices: np.ndarray = field(init=False, repr=False)
    faces: np.ndarray = field(init=False, repr=False)
    file_type = ""

    def __post_init__(self):
        logger.debug("Created %s.", repr(self))

    def parse(self, file_handler: BinaryIO) -> None:
        mesh = trimesh.load(file_handler, file_type=self.file_type,
                            force="mesh", process=False)
        self.vertices = np.asarray(mesh.vertices, dtype=float)
        self.faces = np.asarray(mesh.faces, dtype=np.int64).reshape(-1, 3)
        if len(self.faces) == 0:
            raise DegenerateMeshError("Mesh file holds no triangle.")
        logger.debug("Parsed %i vertices and %i faces by %s.",
                     len(self.vertices), len(self.faces), repr(self))


@dataclass
class StlParser(MeshParser):
    """Parse ASCII (or binary) STL files.
    """
    file_type = "stl"


@dataclass
class ObjParser(MeshParser):
    """Parse Wavefront OBJ files, vertices and triangular faces only.
    """
    file_type = "obj"


REGISTERED_PARSERS: Dict[str, Type[MeshParser]] = {
    ".stl": StlParser,
    ".obj": ObjParser
}


def read_mesh(path: Union[str, Path]) -> MeshParser:
    path = Path(path)
    try:
        parser_cls = REGISTERED_PARSERS[path.suffix.lower()]
    except KeyError:
        raise InvalidArgumentError(
            f"Unsupported mesh format '{path.suffix}'."
        ) from None
    parser = parser_cls()
    with open(path, "rb") as fh:
        parser.parse(fh)
    return parser


def write_ply(cloud: PointCloud, path: Union[str, Path],
              text: bool = False) -> None:
    """Write points (and normals) as 64-bit float PLY vertices.

    Args:
        cloud (PointCloud): cloud to write
        path (Union[str, Path]): output file
        text (bool): ASCII instead of binary little endian
    """
    names = ["x", "y", "z"]
    columns = [cloud.points]
    if cloud.has_normals:
        names += ["nx", "ny", "nz"]
        columns.append(cloud.normals)
    stacked = np.hstack(columns)
    vertex = np.empty(len(cloud), dtype=[(name, "f8") for name in names])
    for i, name in enumerate(names):
        vertex[name] = stacked[:, i]
    PlyData([PlyElement.describe(vertex, "vertex")], text=text,
            byte_order="<").write(str(path))
    logger.debug("Wrote %i points to %s.", len(cloud), path)


def read_ply(path: Union[str, Path]) -> PointCloud:
    ply = PlyData.read(str(path))
    vertex = ply["vertex"]
    names = vertex.data.dtype.names
    points = np.column_stack([vertex[axis] for axis in "xyz"]).astype(float)
    normals = None
    if all(name in names for name in ("nx", "ny", "nz")):
        normals = np.column_stack(
            [vertex[name] for name in ("nx", "ny", "nz")]
        ).astype(float)
        # renormalise float32 normals written by other tools
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    logger.debug("Read %i points from %s.", len(points), path)
    return PointCloud(points, normals)
