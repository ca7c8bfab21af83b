__all__ = [
    'TimeSlotTable',
    'interpolate_slot',
    'interpolate_slots',
    'slot_coordinates',
    'check_times',
    'tv_loss',
    'DeformationNet',
    'DeformationField',
    'deform'
]


from src.deformation.timeslots import (
    TimeSlotTable,
    interpolate_slot,
    interpolate_slots,
    slot_coordinates,
    check_times,
    tv_loss
)
from src.deformation.network import DeformationNet, DeformationField, deform
