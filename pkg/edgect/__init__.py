version = 'edgect 0.3'

from edgect.recon.phantom import shepp_logan
from edgect.recon.projector import ProjectionGeometry, Sinogram, make_geometry
