"""Stakeholder viewpoints and the project slices they see."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from mvmob.model import (
    BusinessLogicModel,
    Correspondence,
    DataModel,
    ModelKind,
    NavigationModel,
    UIModel,
    check_correspondences,
)


class Stakeholder(str, Enum):
    UI_DESIGNER = "uiDesigner"
    APP_DEVELOPER = "appDeveloper"
    BACK_END_DEVELOPER = "backEndDeveloper"
    INFORMATION_ARCHITECT = "informationArchitect"
    CONTENT_PRODUCER = "contentProducer"
    USER = "user"
    CUSTOMER = "customer"
    PROJECT_MANAGER = "projectManager"


_N, _D, _U, _B = ModelKind.NAVIGATION, ModelKind.DATA, ModelKind.UI, ModelKind.BUSINESS_LOGIC

VIEWPOINTS: dict[Stakeholder, frozenset[ModelKind]] = {
    Stakeholder.UI_DESIGNER: frozenset({_N, _D, _U, _B}),
    Stakeholder.APP_DEVELOPER: frozenset({_N, _D, _U, _B}),
    Stakeholder.BACK_END_DEVELOPER: frozenset({_D, _B}),
    Stakeholder.INFORMATION_ARCHITECT: frozenset({_N, _D, _U}),
    Stakeholder.CONTENT_PRODUCER: frozenset({_D}),
    Stakeholder.USER: frozenset({_U}),
    Stakeholder.CUSTOMER: frozenset({_N, _U}),
    Stakeholder.PROJECT_MANAGER: frozenset({_N, _U}),
}


def viewpoints_of(stakeholder: Stakeholder) -> frozenset[ModelKind]:
    return VIEWPOINTS[Stakeholder(stakeholder)]


@dataclass(frozen=True)
class ProjectedSlice:
    """The part of a project one stakeholder sees; absent viewpoints are ``None``."""

    name: str
    stakeholder: Optional[Stakeholder]
    navigation: Optional[NavigationModel] = None
    data: Optional[DataModel] = None
    ui: Optional[UIModel] = None
    logic: Optional[BusinessLogicModel] = None
    correspondences: tuple[Correspondence, ...] = ()
    files: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "correspondences", check_correspondences(self.correspondences))

    @property
    def viewpoints(self) -> frozenset[ModelKind]:
        present = {
            _N: self.navigation, _D: self.data, _U: self.ui, _B: self.logic,
        }
        return frozenset(k for k, m in present.items() if m is not None)


def project_slice(source, stakeholder: Stakeholder) -> ProjectedSlice:
    """Keep the stakeholder's models and the correspondences with both ends inside them.

    ``source`` may be a :class:`~mvmob.model.Project` or an earlier slice.
    """
    stakeholder = Stakeholder(stakeholder)
    keep = viewpoints_of(stakeholder)

    def pick(kind, model):
        return model if kind in keep else None

    corrs = tuple(
        c for c in source.correspondences
        if c.left.model in keep and c.right.model in keep
    )
    files = {k: v for k, v in (getattr(source, "files", None) or {}).items()
             if k in keep or (k is ModelKind.CORRESPONDENCE and len(keep) > 1)}
    return ProjectedSlice(
        name=source.name,
        stakeholder=stakeholder,
        navigation=pick(_N, source.navigation),
        data=pick(_D, source.data),
        ui=pick(_U, source.ui),
        logic=pick(_B, source.logic),
        correspondences=corrs,
        files=files,
    )
